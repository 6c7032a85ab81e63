// Browser entry point. Wires the pure pieces (api/board/render/publish/
// controls) to the DOM: SSE for draft_ready/published/staleness_warning
// with a 10 s polling fallback, confirmation dialogs on every mutation,
// and the blocking staleness prompt once the countdown runs out.

import { ApiError, getDraft, getPlan, getSnapshot, getStaleness, triggerSolve, type ConsoleConfig } from "./api.js";
import { buildBoard, type BoardInput } from "./board.js";
import { submitControl } from "./controls.js";
import { countdownFrom, publishFlow } from "./publish.js";
import { renderBoard, renderPinBoard } from "./render.js";
import { streamEvents } from "./sse.js";
import type { ControlRequest, DraftDoc, PublishedDoc, SnapshotStatus, StalenessDoc } from "./types.js";

const POLL_INTERVAL_MS = 10_000;

function configFromLocation(): ConsoleConfig {
  const params = new URLSearchParams(window.location.search);
  return {
    baseUrl: params.get("service") ?? window.location.origin,
    awc: params.get("awc") ?? "AWC-1",
    token: params.get("token") ?? undefined,
  };
}

interface AppState {
  snapshot: SnapshotStatus | null;
  draft: DraftDoc | null;
  published: PublishedDoc | null;
  staleness: StalenessDoc | null;
  unreachable: boolean;
  modalShown: string | null; // draft id the stale prompt was shown for
}

const state: AppState = {
  snapshot: null,
  draft: null,
  published: null,
  staleness: null,
  unreachable: false,
  modalShown: null,
};

async function maybe<T>(call: Promise<T>): Promise<T | null> {
  // 404s are normal absences (no draft yet, nothing published);
  // anything unreachable flips the offline banner instead of throwing.
  try {
    return await call;
  } catch (err) {
    if (err instanceof ApiError) {
      if (err.code === "Unreachable") {
        state.unreachable = true;
        return null;
      }
      if (err.status === 404) return null;
    }
    throw err;
  }
}

async function refresh(cfg: ConsoleConfig): Promise<void> {
  state.unreachable = false;
  const snapshot = await maybe(getSnapshot(cfg));
  if (snapshot) state.snapshot = snapshot;
  state.draft = await maybe(getDraft(cfg));
  state.published = (await maybe(getPlan(cfg))) ?? state.published;
  state.staleness = await maybe(getStaleness(cfg));
  render(cfg);
}

function render(cfg: ConsoleConfig): void {
  const input: BoardInput = {
    snapshot: state.snapshot?.snapshot,
    mode: state.snapshot?.mode ?? "normal",
    draft: state.draft,
    published: state.published,
    staleness: state.staleness,
    unreachable: state.unreachable,
  };
  const vm = buildBoard(input);
  const board = document.getElementById("board");
  if (board) board.innerHTML = renderBoard(vm);
  const map = document.getElementById("map");
  if (map && state.snapshot) map.innerHTML = renderPinBoard(state.snapshot.snapshot);

  document.getElementById("publish-btn")?.addEventListener("click", () => {
    void publishClicked(cfg);
  });

  if (state.staleness && countdownFrom(state.staleness).promptNow) {
    void stalePrompt(cfg);
  }
}

async function publishClicked(cfg: ConsoleConfig): Promise<void> {
  if (!state.draft) return;
  const staleness = await maybe(getStaleness(cfg));
  if (staleness && countdownFrom(staleness).promptNow) {
    await stalePrompt(cfg);
    return;
  }
  if (!window.confirm(`Publish ${state.draft.draft_id}? Slot 1 of every pipeline freezes.`)) {
    return;
  }
  const outcome = await publishFlow(cfg, state.draft.draft_id, false);
  if (!outcome.ok) {
    reportError(`${outcome.code}: ${outcome.message}` + (outcome.suggestRetrigger ? " - re-trigger suggested" : ""));
  }
  await refresh(cfg);
}

// Blocking prompt once the countdown expires: re-solve, or publish anyway
// with the explicit stale confirmation.
async function stalePrompt(cfg: ConsoleConfig): Promise<void> {
  if (!state.draft || state.modalShown === state.draft.draft_id) return;
  state.modalShown = state.draft.draft_id;
  const publishAnyway = window.confirm(
    `Draft ${state.draft.draft_id} is older than the staleness bound.\n` +
      `OK: publish anyway (stale-confirmed). Cancel: discard and re-solve.`,
  );
  if (publishAnyway) {
    const outcome = await publishFlow(cfg, state.draft.draft_id, true);
    if (!outcome.ok) reportError(`${outcome.code}: ${outcome.message}`);
  } else {
    await maybe(triggerSolve(cfg, "manual"));
  }
  await refresh(cfg);
}

function reportError(message: string): void {
  const el = document.getElementById("errors");
  if (el) el.textContent = message;
}

function wireControlButtons(cfg: ConsoleConfig): void {
  document.getElementById("controls")?.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const op = target.dataset.op;
    if (!op) return;
    const crew = (document.getElementById("crew-input") as HTMLInputElement | null)?.value ?? "";
    const outage = (document.getElementById("outage-input") as HTMLInputElement | null)?.value ?? "";
    let req: ControlRequest;
    if (op === "lock") req = { op, crew, outage };
    else if (op === "withhold") req = { op, enabled: target.dataset.enabled !== "false" };
    else if (op === "freeze" || op === "unfreeze" || op === "unlock") req = { op, crew };
    else return;
    void submitControl(cfg, req, (prompt) => window.confirm(prompt)).then((outcome) => {
      if (!outcome.ok && outcome.code !== "NotConfirmed") {
        reportError(`${outcome.code}: ${outcome.message}`);
      }
      return refresh(cfg);
    });
  });
  document.getElementById("trigger-btn")?.addEventListener("click", () => {
    void maybe(triggerSolve(cfg, "manual")).then(() => refresh(cfg));
  });
}

async function eventLoop(cfg: ConsoleConfig): Promise<never> {
  for (;;) {
    try {
      await streamEvents(cfg, { timeoutSeconds: 25 }, (event) => {
        if (event.kind === "staleness_warning") state.modalShown = null;
        void refresh(cfg);
      });
    } catch {
      state.unreachable = true;
      render(cfg);
      await new Promise((resolve) => setTimeout(resolve, 2000));
    }
  }
}

export function main(): void {
  const cfg = configFromLocation();
  wireControlButtons(cfg);
  void refresh(cfg);
  void eventLoop(cfg);
  window.setInterval(() => void refresh(cfg), POLL_INTERVAL_MS);
  window.setInterval(() => {
    // tick the countdown locally between staleness fetches
    if (state.staleness && state.staleness.remaining_seconds > 0) {
      state.staleness = {
        ...state.staleness,
        remaining_seconds: Math.max(0, state.staleness.remaining_seconds - 1),
        stale: state.staleness.remaining_seconds - 1 <= 0 ? true : state.staleness.stale,
      };
      render(cfg);
    }
  }, 1000);
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  main();
}
