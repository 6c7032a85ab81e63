// Thin typed client over the dispatch service. Every call resolves to the
// service's JSON verbatim or throws ApiError carrying the service's error
// code; network failures surface as code "Unreachable" so the board can
// show its offline banner while keeping the last rendered state.

import type {
  ControlAck,
  ControlRequest,
  DraftDoc,
  PublishedDoc,
  SnapshotDoc,
  SnapshotStatus,
  StalenessDoc,
  TriggerSource,
} from "./types.js";

export interface ConsoleConfig {
  baseUrl: string;
  awc: string;
  token?: string;
}

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

export function awcUrl(cfg: ConsoleConfig, tail: string): string {
  const base = cfg.baseUrl.replace(/\/$/, "");
  return `${base}/v1/awcs/${encodeURIComponent(cfg.awc)}/${tail}`;
}

function headers(cfg: ConsoleConfig, json: boolean): Record<string, string> {
  const out: Record<string, string> = {};
  if (json) out["Content-Type"] = "application/json";
  if (cfg.token) out["X-Auth-Token"] = cfg.token;
  return out;
}

async function request<T>(
  cfg: ConsoleConfig,
  method: "GET" | "POST",
  tail: string,
  body?: unknown,
): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(awcUrl(cfg, tail), {
      method,
      headers: headers(cfg, body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError("Unreachable", `service unreachable: ${err}`, 0);
  }
  if (!resp.ok) {
    let code = "HttpError";
    let message = `${resp.status} ${resp.statusText}`;
    try {
      const doc = (await resp.json()) as { error?: { code?: string; message?: string } };
      if (doc.error?.code) code = doc.error.code;
      if (doc.error?.message) message = doc.error.message;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(code, message, resp.status);
  }
  return (await resp.json()) as T;
}

export function getSnapshot(cfg: ConsoleConfig): Promise<SnapshotStatus> {
  return request(cfg, "GET", "snapshot");
}

export function ingestSnapshot(
  cfg: ConsoleConfig,
  doc: SnapshotDoc,
): Promise<{ snapshot_id: string; mode: string }> {
  return request(cfg, "POST", "snapshot", doc);
}

export function triggerSolve(
  cfg: ConsoleConfig,
  source: TriggerSource = "manual",
): Promise<DraftDoc> {
  return request(cfg, "POST", "trigger", { source });
}

export function getDraft(cfg: ConsoleConfig): Promise<DraftDoc> {
  return request(cfg, "GET", "draft");
}

export function getPlan(cfg: ConsoleConfig): Promise<PublishedDoc> {
  return request(cfg, "GET", "plan");
}

export function getStaleness(cfg: ConsoleConfig): Promise<StalenessDoc> {
  return request(cfg, "GET", "staleness");
}

export function sendControl(cfg: ConsoleConfig, req: ControlRequest): Promise<ControlAck> {
  return request(cfg, "POST", "controls", req);
}

export function publishDraft(
  cfg: ConsoleConfig,
  draftId: string,
  confirmStale = false,
): Promise<PublishedDoc> {
  return request(cfg, "POST", "publish", {
    draft_id: draftId,
    confirm_stale: confirmStale,
  });
}
