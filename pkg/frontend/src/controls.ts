// Operator controls. Every mutation goes through an explicit confirmation
// callback (a dialog in the browser); unconfirmed actions never reach the
// network, and service rejections come back as inline results so the
// board state stays exactly what the service last acknowledged.

import { ApiError, sendControl, type ConsoleConfig } from "./api.js";
import type { ControlRequest, ControlsDoc } from "./types.js";

export type ControlOutcome =
  | { ok: true; controls: ControlsDoc }
  | { ok: false; code: string; message: string };

export function describeControl(req: ControlRequest): string {
  switch (req.op) {
    case "freeze":
      return `Freeze crew ${req.crew}? It will be skipped by upcoming solves.`;
    case "unfreeze":
      return `Unfreeze crew ${req.crew}?`;
    case "lock":
      return `Lock crew ${req.crew} to outage ${req.outage}? The next solve must honor it.`;
    case "unlock":
      return `Unlock crew ${req.crew}?`;
    case "withhold":
      return req.enabled
        ? "Withhold publishing for this area work center?"
        : "Allow publishing again?";
  }
}

export async function submitControl(
  cfg: ConsoleConfig,
  req: ControlRequest,
  confirm: (prompt: string) => boolean | Promise<boolean>,
): Promise<ControlOutcome> {
  const approved = await confirm(describeControl(req));
  if (!approved) {
    return { ok: false, code: "NotConfirmed", message: "operator cancelled" };
  }
  try {
    const ack = await sendControl(cfg, req);
    return { ok: true, controls: ack.controls };
  } catch (err) {
    if (err instanceof ApiError) {
      return { ok: false, code: err.code, message: err.message };
    }
    throw err;
  }
}
