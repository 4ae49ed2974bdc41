"""Newline-delimited JSON oracle protocol over a child process or TCP socket.

The server first writes a handshake line::

    {"protocol": "smattr-oracle", "version": 1, "d": D, "k": K, "h": H, "w": W, "c": C}

then answers one request per line::

    {"id": 7, "op": "embed" | "evidence" | "class_weight",
     "h": H, "w": W, "c": C, "data": "<base64 little-endian float32, row-major>",
     "category": 3}

with ``{"id": 7, "ok": true, "vector": [...]}`` or
``{"id": 7, "ok": false, "error": "..."}``. Responses may arrive out of
order; clients match them by id.
"""

import base64
import itertools
import json
import logging
import shlex
import socket
import socketserver
import subprocess
import threading
from concurrent.futures import Future, TimeoutError as FutureTimeout

import numpy as np

from ..exceptions import OracleError, OracleInputError, OracleIOError
from .base import Oracle

PROTOCOL = "smattr-oracle"
VERSION = 1
OPS = ("embed", "evidence", "class_weight")

logger = logging.getLogger(__name__)


def encode_image(image):
    arr = np.ascontiguousarray(image, dtype="<f4")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def decode_image(data, h, w, c):
    raw = base64.b64decode(data, validate=True)
    if len(raw) != 4 * h * w * c:
        raise OracleInputError(f"payload holds {len(raw)} bytes, expected {4 * h * w * c}")
    return np.frombuffer(raw, dtype="<f4").reshape(h, w, c).astype(np.float32)


def handshake(oracle):
    h, w, c = oracle.shape
    return {"protocol": PROTOCOL, "version": VERSION, "d": oracle.feature_dim,
            "k": oracle.n_categories, "h": h, "w": w, "c": c}


def handle_request(oracle, request):
    """Answer one decoded request dict; never raises."""
    rid = request.get("id") if isinstance(request, dict) else None
    try:
        if not isinstance(request, dict):
            raise OracleInputError("request must be a JSON object")
        op = request.get("op")
        if op not in OPS:
            raise OracleInputError(f"unknown op {op!r}")
        if op == "class_weight":
            vector = oracle.class_weight(request["category"])
        else:
            image = decode_image(request["data"], int(request["h"]), int(request["w"]), int(request["c"]))
            vector = oracle.embed(image) if op == "embed" else oracle.evidence(image)
        return {"id": rid, "ok": True, "vector": [float(v) for v in vector]}
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error reply
        return {"id": rid, "ok": False, "error": f"{type(exc).__name__}: {exc}"}


def serve_stream(oracle, rfile, wfile):
    """Serve requests from text stream ``rfile`` until EOF."""
    wfile.write(json.dumps(handshake(oracle)) + "\n")
    wfile.flush()
    for line in rfile:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            reply = {"id": None, "ok": False, "error": f"malformed JSON: {exc}"}
        else:
            reply = handle_request(oracle, request)
        wfile.write(json.dumps(reply) + "\n")
        wfile.flush()


def serve_tcp(oracle, host, port, ready=None):
    """Serve each TCP connection on its own thread. Blocks forever."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            rfile = self.rfile
            wfile = self.wfile

            class _Text:
                def write(self, s):
                    wfile.write(s.encode())

                def flush(self):
                    wfile.flush()

            serve_stream(oracle, (raw.decode() for raw in rfile), _Text())

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        if ready is not None:
            ready(server.server_address)
        server.serve_forever()


class ExternalOracle(Oracle):
    """Client for an oracle server reached via a command or a TCP address.

    Requests are tagged with increasing ids and may be in flight
    concurrently; a reader thread routes replies to the waiting callers.
    """

    def __init__(self, command=None, address=None, timeout_ms=30000):
        if (command is None) == (address is None):
            raise OracleError("configure exactly one of command or address")
        self.timeout = timeout_ms / 1000.0
        self._ids = itertools.count(1)
        self._pending = {}
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._closed = False
        self._failure = None
        self._proc = None
        self._sock = None
        if command is not None:
            argv = shlex.split(command) if isinstance(command, str) else list(command)
            try:
                self._proc = subprocess.Popen(
                    argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1,
                )
            except OSError as exc:
                raise OracleIOError(f"cannot start oracle {argv!r}: {exc}") from exc
            self._rfile, self._wfile = self._proc.stdout, self._proc.stdin
        else:
            host, _, port = address.rpartition(":")
            try:
                self._sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=self.timeout)
            except OSError as exc:
                raise OracleIOError(f"cannot connect to oracle at {address}: {exc}") from exc
            self._sock.settimeout(None)
            self._rfile = self._sock.makefile("r", encoding="utf-8", newline="\n")
            self._wfile = self._sock.makefile("w", encoding="utf-8", newline="\n")
        self._hello = Future()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        try:
            hello = self._hello.result(timeout=self.timeout)
        except FutureTimeout:
            self.close(kill=True)
            raise OracleIOError("timed out waiting for oracle handshake") from None
        except OracleIOError:
            self.close(kill=True)
            raise
        if hello.get("protocol") != PROTOCOL or hello.get("version") != VERSION:
            self.close(kill=True)
            raise OracleIOError(f"unsupported oracle handshake {hello!r}")
        self.shape = (int(hello["h"]), int(hello["w"]), int(hello["c"]))
        self.feature_dim = int(hello["d"])
        self.n_categories = int(hello["k"])

    def _read_loop(self):
        try:
            for line in self._rfile:
                line = line.strip()
                if not line:
                    continue
                msg = json.loads(line)
                if not self._hello.done():
                    self._hello.set_result(msg)
                    continue
                with self._lock:
                    fut = self._pending.pop(msg.get("id"), None)
                if fut is None:
                    raise OracleIOError(f"reply with unknown id: {line[:200]}")
                fut.set_result(msg)
            raise OracleIOError("oracle closed the connection")
        except Exception as exc:  # noqa: BLE001
            err = exc if isinstance(exc, OracleIOError) else OracleIOError(f"protocol violation: {exc}")
            self._fail(err)

    def _fail(self, err):
        with self._lock:
            self._failure = err
            pending, self._pending = self._pending, {}
        if not self._hello.done():
            self._hello.set_exception(err)
        for fut in pending.values():
            if not fut.done():
                fut.set_exception(err)

    def _call(self, request):
        rid = next(self._ids)
        request = {"id": rid, **request}
        fut = Future()
        with self._lock:
            if self._failure is not None:
                raise self._failure
            self._pending[rid] = fut
        try:
            with self._write_lock:
                self._wfile.write(json.dumps(request) + "\n")
                self._wfile.flush()
        except (OSError, ValueError) as exc:
            raise OracleIOError(f"cannot write to oracle: {exc}") from exc
        try:
            reply = fut.result(timeout=self.timeout)
        except FutureTimeout:
            with self._lock:
                self._pending.pop(rid, None)
            raise OracleIOError(f"oracle request {rid} timed out after {self.timeout:.3f}s") from None
        if not reply.get("ok"):
            raise OracleError(f"oracle rejected request: {reply.get('error')}")
        vector = reply.get("vector")
        if not isinstance(vector, list):
            raise OracleIOError("oracle reply lacks a vector")
        return np.array(vector, dtype=np.float64)

    def _image_request(self, op, image):
        arr = self.check_input(image)
        h, w, c = arr.shape
        return self._call({"op": op, "h": h, "w": w, "c": c, "data": encode_image(arr)})

    def embed(self, image):
        return self._image_request("embed", image)

    def evidence(self, image):
        return self._image_request("evidence", image)

    def class_weight(self, category):
        return self._call({"op": "class_weight", "category": self.check_category(category)})

    def close(self, kill=False):
        if self._closed:
            return
        self._closed = True
        try:
            self._wfile.close()
        except OSError:
            pass
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
        if self._proc is not None:
            if kill:
                self._proc.kill()
            try:
                self._proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._reader.join(timeout=5)
        try:
            self._rfile.close()
        except OSError:
            pass
        if self._sock is not None:
            self._sock.close()
