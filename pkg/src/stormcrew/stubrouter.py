"""In-process HTTP stub implementing the distance-matrix router contract.

Accepts ``POST {origins: [{lat, lon}], destinations: [{lat, lon}]}`` and
returns ``{seconds: [[...]]}``. Values are haversine time scaled by a road
factor, so they are deterministic and slightly worse than crow-flies.

Fault injection knobs (set attributes between requests):

* ``fail_next`` — the next N requests return HTTP 500.
* ``null_cells`` — set of (i, j) positions returned as null (unroutable).
* ``delay_s`` — sleep before answering (timeout testing).
* ``require_token`` — reject requests lacking this bearer token with 401.
"""
from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .geo import haversine_m
from .model import GeoPoint

DEFAULT_ROAD_FACTOR = 1.25
DEFAULT_SPEED_MPS = 10.0


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def do_POST(self):
        router: StubRouterServer = self.server.router  # type: ignore[attr-defined]
        with router._lock:
            if router.delay_s:
                time.sleep(router.delay_s)
            if router.fail_next > 0:
                router.fail_next -= 1
                self._send(500, {"error": "injected failure"})
                return
            if router.require_token is not None:
                auth = self.headers.get("Authorization", "")
                if auth != f"Bearer {router.require_token}":
                    self._send(401, {"error": "missing or bad token"})
                    return
            null_cells = set(router.null_cells)
            router.request_count += 1

        try:
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length))
            origins = [GeoPoint(p["lat"], p["lon"]) for p in body["origins"]]
            destinations = [GeoPoint(p["lat"], p["lon"]) for p in body["destinations"]]
        except Exception:
            self._send(400, {"error": "malformed request"})
            return

        seconds: list[list[float | None]] = []
        for i, a in enumerate(origins):
            row: list[float | None] = []
            for j, b in enumerate(destinations):
                if (i, j) in null_cells:
                    row.append(None)
                else:
                    row.append(haversine_m(a, b) / router.speed_mps * router.road_factor)
            seconds.append(row)
        self._send(200, {"seconds": seconds})

    def _send(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class StubRouterServer:
    """Threaded stub router bound to an ephemeral localhost port."""

    def __init__(
        self,
        road_factor: float = DEFAULT_ROAD_FACTOR,
        speed_mps: float = DEFAULT_SPEED_MPS,
    ) -> None:
        self.road_factor = road_factor
        self.speed_mps = speed_mps
        self.fail_next = 0
        self.null_cells: set[tuple[int, int]] = set()
        self.delay_s = 0.0
        self.require_token: str | None = None
        self.request_count = 0
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._server.router = self  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/matrix"

    def start(self) -> "StubRouterServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "StubRouterServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def main() -> None:
    """Run the stub router standalone on a fixed port (dev convenience)."""
    import argparse

    parser = argparse.ArgumentParser(description="stub distance-matrix router")
    parser.add_argument("--port", type=int, default=8787)
    args = parser.parse_args()
    server = ThreadingHTTPServer(("127.0.0.1", args.port), _Handler)
    server.router = StubRouterServer.__new__(StubRouterServer)  # type: ignore[attr-defined]
    router = server.router  # type: ignore[attr-defined]
    router.road_factor = DEFAULT_ROAD_FACTOR
    router.speed_mps = DEFAULT_SPEED_MPS
    router.fail_next = 0
    router.null_cells = set()
    router.delay_s = 0.0
    router.require_token = None
    router.request_count = 0
    router._lock = threading.Lock()
    print(f"stub router listening on http://127.0.0.1:{args.port}/matrix")
    server.serve_forever()


if __name__ == "__main__":
    main()
