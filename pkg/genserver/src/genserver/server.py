"""HTTP adapter exposing the generator wire protocol.

POST /generate  {"text": str, "max_tokens": int}  ->  {"text": str}
GET  /health    -> {"model": str}

Requests are handled by a single-threaded server, so the one model instance
serves them strictly in arrival order.
"""
from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, HTTPServer

from .model import Seq2Seq, load_checkpoint
from .vocab import Vocab

logger = logging.getLogger(__name__)

DEFAULT_MAX_INPUT_LEN = 512
DEFAULT_BEAM_SIZE = 4


@dataclass(frozen=True)
class ServerConfig:
    checkpoint: str
    port: int = 8080
    max_input_len: int = DEFAULT_MAX_INPUT_LEN
    beam_size: int = DEFAULT_BEAM_SIZE

    def __post_init__(self) -> None:
        if self.max_input_len < 1:
            raise ValueError("max input length must be positive")
        if self.beam_size < 1:
            raise ValueError("beam size must be positive")


def prepare_input(text: str, vocab: Vocab, max_input_len: int) -> tuple[list[int], bool]:
    """Encode and truncate; the flag reports whether truncation happened."""
    ids = vocab.encode(text)
    if len(ids) > max_input_len:
        return ids[:max_input_len], True
    return ids, False


class GeneratorService:
    """Model wrapper shared by the HTTP handler and direct callers."""

    def __init__(self, model: Seq2Seq, vocab: Vocab, model_id: str, config: ServerConfig):
        self.model = model
        self.vocab = vocab
        self.model_id = model_id
        self.config = config
        self.truncations = 0

    @classmethod
    def from_checkpoint(cls, config: ServerConfig) -> "GeneratorService":
        model, vocab, model_id = load_checkpoint(config.checkpoint)
        return cls(model, vocab, model_id, config)

    def generate(self, text: str, max_tokens: int) -> str:
        ids, truncated = prepare_input(text, self.vocab, self.config.max_input_len)
        if truncated:
            self.truncations += 1
            logger.info(
                "input truncated to %d tokens (%d so far)",
                self.config.max_input_len,
                self.truncations,
            )
        output_ids = self.model.generate(
            ids, self.vocab, max_tokens=max_tokens, beam_size=self.config.beam_size
        )
        return self.vocab.decode(output_ids)


def _make_handler(service: GeneratorService):
    class Handler(BaseHTTPRequestHandler):
        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/health":
                self._send_json(200, {"model": service.model_id})
            else:
                self._send_json(404, {"error": f"unknown path {self.path}"})

        def do_POST(self):
            if self.path != "/generate":
                self._send_json(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length))
                text = payload["text"]
                max_tokens = int(payload.get("max_tokens", 64))
                if not isinstance(text, str) or max_tokens < 1:
                    raise ValueError("bad field values")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                self._send_json(400, {"error": f"malformed request: {exc}"})
                return
            self._send_json(200, {"text": service.generate(text, max_tokens)})

        def log_message(self, *args):
            logger.debug("%s", args)

    return Handler


def make_server(config: ServerConfig) -> tuple[HTTPServer, GeneratorService]:
    service = GeneratorService.from_checkpoint(config)
    server = HTTPServer(("127.0.0.1", config.port), _make_handler(service))
    return server, service


def serve(config: ServerConfig) -> None:
    """Run the endpoint until interrupted."""
    server, service = make_server(config)
    logger.info("serving %s on port %d", service.model_id, server.server_port)
    server.serve_forever()


def serve_in_thread(config: ServerConfig) -> tuple[HTTPServer, GeneratorService, threading.Thread]:
    """Start the endpoint on a daemon thread (port 0 picks a free port)."""
    server, service = make_server(config)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, service, thread
