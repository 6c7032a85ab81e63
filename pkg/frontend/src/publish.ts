// Publish flow: staleness countdown math and the confirm-stale gate.
// The countdown is rendered from /staleness responses; past the bound T a
// blocking prompt demands the confirm_stale checkbox before publishing.

import { ApiError, publishDraft, type ConsoleConfig } from "./api.js";
import type { PublishedDoc, StalenessDoc } from "./types.js";

export interface Countdown {
  draftId: string;
  remainingSeconds: number;
  stale: boolean;
  promptNow: boolean;
}

export function countdownFrom(doc: StalenessDoc): Countdown {
  return {
    draftId: doc.draft_id,
    remainingSeconds: doc.remaining_seconds,
    stale: doc.stale,
    promptNow: doc.stale || doc.remaining_seconds <= 0,
  };
}

export type PublishGate = "publish" | "confirm_required";

export function publishGate(doc: StalenessDoc): PublishGate {
  return doc.stale ? "confirm_required" : "publish";
}

export type PublishOutcome =
  | { ok: true; published: PublishedDoc }
  | { ok: false; code: string; message: string; suggestRetrigger: boolean };

// confirmStale mirrors the operator's checkbox; without it a stale draft
// comes back as StalePlan with a re-trigger suggestion instead of a throw.
export async function publishFlow(
  cfg: ConsoleConfig,
  draftId: string,
  confirmStale: boolean,
): Promise<PublishOutcome> {
  try {
    const published = await publishDraft(cfg, draftId, confirmStale);
    return { ok: true, published };
  } catch (err) {
    if (err instanceof ApiError) {
      return {
        ok: false,
        code: err.code,
        message: err.message,
        suggestRetrigger: err.code === "StalePlan",
      };
    }
    throw err;
  }
}
