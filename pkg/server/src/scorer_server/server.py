"""HTTP server speaking the scorer wire protocol.

Endpoints:
    GET  /v1/vocab     vocabulary file format (line-oriented JSON)
    POST /v1/logprobs  {"tokens": [int, ...]} -> {"logprobs": [float x |V|]}
    GET  /healthz      200 when the backend is ready

Responses are UTF-8 JSON except /v1/vocab (the raw vocabulary text). Errors:
400 malformed body or invalid token ids, 413 over-long prefix, 503 while the
backend is still loading.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .backends import InvalidTokensError

DEFAULT_MAX_PREFIX = 1024


@dataclass
class ServerConfig:
    backend_spec: str
    host: str = "127.0.0.1"
    port: int = 8000
    device: str = "cpu"
    max_prefix: int = DEFAULT_MAX_PREFIX

    def __post_init__(self) -> None:
        if self.max_prefix < 1:
            raise ValueError("max_prefix must be >= 1")


class ScorerHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, max_prefix: int) -> None:
        super().__init__(address, _Handler)
        self.backend = None
        self.max_prefix = max_prefix
        self.ready = threading.Event()

    def install_backend(self, backend) -> None:
        self.backend = backend
        self.ready.set()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args) -> None:  # stay quiet; stderr is for errors
        pass

    @property
    def _server(self) -> ScorerHTTPServer:
        return self.server  # type: ignore[return-value]

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, json.dumps(obj).encode("utf-8"), "application/json")

    def do_GET(self) -> None:
        if self.path == "/healthz":
            if self._server.ready.is_set():
                self._send_json(200, {"status": "ok"})
            else:
                self._send_json(503, {"status": "loading"})
            return
        if self.path == "/v1/vocab":
            if not self._server.ready.is_set():
                self._send_json(503, {"error": "model loading"})
                return
            body = self._server.backend.serve_vocab().encode("utf-8")
            self._send(200, body, "text/plain; charset=utf-8")
            return
        self._send_json(404, {"error": f"no such path {self.path}"})

    def do_POST(self) -> None:
        if self.path != "/v1/logprobs":
            self._send_json(404, {"error": f"no such path {self.path}"})
            return
        if not self._server.ready.is_set():
            self._send_json(503, {"error": "model loading"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length))
            tokens = payload["tokens"]
            if not isinstance(tokens, list):
                raise TypeError("tokens must be a list")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            self._send_json(400, {"error": f"malformed body: {exc}"})
            return
        if len(tokens) > self._server.max_prefix:
            self._send_json(
                413,
                {"error": f"prefix longer than max of {self._server.max_prefix}"},
            )
            return
        try:
            vector = self._server.backend.logprobs(tokens)
        except InvalidTokensError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(200, {"logprobs": vector.tolist()})


def make_server(config: ServerConfig) -> ScorerHTTPServer:
    """Bind the socket (unready) so callers control when loading happens."""
    return ScorerHTTPServer((config.host, config.port), config.max_prefix)
