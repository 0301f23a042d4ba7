"""Local HTTP server speaking the repair-agent wire contract, for tests and demos.

Modes:
  echo       reply with the draft report carried in the request
  malformed  reply with a body that is not JSON
  error      reply with HTTP 500
  rewrite    reply with a report whose r_prompt is prefixed with "[refined] "
"""
from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

MODES = ("echo", "malformed", "error", "rewrite")


def _handler(mode: str, seen: list):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length) or b"{}")
            seen.append({"body": body, "authorization": self.headers.get("Authorization")})
            if mode == "error":
                self.send_response(500)
                self.end_headers()
                return
            if mode == "malformed":
                payload = b"<html>not json</html>"
            else:
                draft = dict(body["input"]["draft"])
                if mode == "rewrite":
                    draft["r_prompt"] = "[refined] " + draft["r_prompt"]
                payload = json.dumps(draft).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

    return Handler


@contextmanager
def serve(mode: str = "echo"):
    """Run a mock server on an ephemeral port; yields ``(url, requests_seen)``."""
    if mode not in MODES:
        raise ValueError(f"unknown mock mode {mode!r}")
    seen: list = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _handler(mode, seen))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        host, port = server.server_address[:2]
        yield f"http://{host}:{port}/v1/repair", seen
    finally:
        server.shutdown()
        server.server_close()
        thread.join()
