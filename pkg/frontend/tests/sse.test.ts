import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses a complete frame", () => {
    const parser = new SseParser();
    const events = parser.feed('id: 3\nevent: draft_ready\ndata: {"draft_id": "draft-1"}\n\n');
    expect(events).toEqual([
      { id: 3, kind: "draft_ready", data: { draft_id: "draft-1" } },
    ]);
  });

  it("buffers frames split across chunks", () => {
    const parser = new SseParser();
    expect(parser.feed("id: 1\nevent: pub")).toEqual([]);
    expect(parser.feed('lished\ndata: {"x": 1}\n')).toEqual([]);
    const events = parser.feed("\nid: 2\n");
    expect(events).toEqual([{ id: 1, kind: "published", data: { x: 1 } }]);
  });

  it("returns several frames from one chunk", () => {
    const parser = new SseParser();
    const events = parser.feed(
      'id: 1\nevent: a\ndata: {"n": 1}\n\nid: 2\nevent: b\ndata: {"n": 2}\n\n',
    );
    expect(events.map((e) => e.kind)).toEqual(["a", "b"]);
    expect(events.map((e) => e.id)).toEqual([1, 2]);
  });

  it("ignores comment keepalives", () => {
    const parser = new SseParser();
    expect(parser.feed(": stream open\n\n")).toEqual([]);
    expect(parser.feed(': ping\n\nid: 1\ndata: {"k": 1}\n\n')).toEqual([
      { id: 1, kind: "message", data: { k: 1 } },
    ]);
  });

  it("joins multi-line data with newlines", () => {
    const parser = new SseParser();
    const events = parser.feed("data: line one\ndata: line two\n\n");
    expect(events).toEqual([{ id: null, kind: "message", data: "line one\nline two" }]);
  });

  it("tolerates CRLF line endings", () => {
    const parser = new SseParser();
    const events = parser.feed('id: 7\r\nevent: published\r\ndata: {"ok": true}\r\n\r\n');
    expect(events).toEqual([{ id: 7, kind: "published", data: { ok: true } }]);
  });

  it("keeps non-JSON data as a raw string", () => {
    const parser = new SseParser();
    expect(parser.feed("data: not json\n\n")[0]?.data).toBe("not json");
  });

  it("drops frames with no data field", () => {
    const parser = new SseParser();
    expect(parser.feed("id: 9\nevent: nothing\n\n")).toEqual([]);
  });
});
