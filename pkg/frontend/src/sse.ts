// Server-sent events over fetch streaming. Node 20 (where the tests run)
// has no EventSource, and the browser build gets query-parameter control
// over replay/max_events this way too, so one small parser serves both.

import { ApiError, awcUrl, type ConsoleConfig } from "./api.js";
import type { ConsoleEvent } from "./types.js";

export class SseParser {
  private buffer = "";

  // Feed a decoded chunk; returns every complete frame it closed off.
  feed(chunk: string): ConsoleEvent[] {
    this.buffer += chunk.replace(/\r\n/g, "\n");
    const events: ConsoleEvent[] = [];
    for (;;) {
      const split = this.buffer.indexOf("\n\n");
      if (split < 0) break;
      const frame = this.buffer.slice(0, split);
      this.buffer = this.buffer.slice(split + 2);
      const event = parseFrame(frame);
      if (event) events.push(event);
    }
    return events;
  }
}

function parseFrame(frame: string): ConsoleEvent | null {
  let id: number | null = null;
  let kind = "message";
  const dataLines: string[] = [];
  for (const line of frame.split("\n")) {
    if (!line || line.startsWith(":")) continue; // comment / keepalive
    const colon = line.indexOf(":");
    const field = colon < 0 ? line : line.slice(0, colon);
    let value = colon < 0 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "id") {
      const parsed = Number(value);
      id = Number.isFinite(parsed) ? parsed : null;
    } else if (field === "event") {
      kind = value;
    } else if (field === "data") {
      dataLines.push(value);
    }
  }
  if (dataLines.length === 0) return null;
  const raw = dataLines.join("\n");
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    data = raw;
  }
  return { id, kind, data };
}

export interface StreamOptions {
  replay?: boolean;
  maxEvents?: number;
  timeoutSeconds?: number;
  signal?: AbortSignal;
}

// Reads one /events response to completion, invoking onEvent per frame.
// The server closes the stream after timeoutSeconds or maxEvents; callers
// wanting a persistent feed loop around this (see app.ts).
export async function streamEvents(
  cfg: ConsoleConfig,
  opts: StreamOptions,
  onEvent: (event: ConsoleEvent) => void,
): Promise<number> {
  const params = new URLSearchParams();
  if (opts.replay) params.set("replay", "1");
  if (opts.maxEvents !== undefined) params.set("max_events", String(opts.maxEvents));
  if (opts.timeoutSeconds !== undefined) {
    params.set("timeout_seconds", String(opts.timeoutSeconds));
  }
  const url = `${awcUrl(cfg, "events")}?${params.toString()}`;

  let resp: Response;
  try {
    resp = await fetch(url, {
      headers: cfg.token ? { "X-Auth-Token": cfg.token } : {},
      signal: opts.signal ?? null,
    });
  } catch (err) {
    throw new ApiError("Unreachable", `event stream unreachable: ${err}`, 0);
  }
  if (!resp.ok || !resp.body) {
    throw new ApiError("HttpError", `event stream returned ${resp.status}`, resp.status);
  }

  const reader = resp.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  let count = 0;
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
      count += 1;
      onEvent(event);
    }
  }
  return count;
}

// Collect events until a predicate matches or the server-side timeout ends
// the stream; resolves with everything seen. Test and scripting helper.
export async function collectEvents(
  cfg: ConsoleConfig,
  opts: StreamOptions,
  until?: (event: ConsoleEvent) => boolean,
): Promise<ConsoleEvent[]> {
  const seen: ConsoleEvent[] = [];
  const controller = new AbortController();
  const merged = { ...opts, signal: controller.signal };
  try {
    await streamEvents(cfg, merged, (event) => {
      seen.push(event);
      if (until && until(event)) controller.abort();
    });
  } catch (err) {
    if (!controller.signal.aborted) throw err;
  }
  return seen;
}
