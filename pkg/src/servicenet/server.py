"""The lightweight HTTP front door.

Routes by prefix: `/service/...` (or a POST with an XML call body) goes
through decode -> password gate -> dispatch; `/files/<alias>/...` serves
static content confined to whitelisted roots; `/meta` returns the
registry's network view; `/ui/...` serves the console assets.  Faults map
to the fixed wire code table and a bad request never kills the accept
loop.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import unquote, urlsplit

from . import wire
from .errors import BadPassword, Fault, ForbiddenPath, NotFound, Unparseable
from .wire import WireResponse

MAX_BODY = 16 * 1024 * 1024  # requests beyond this are rejected outright

CONTENT_TYPES = {
    ".html": "text/html",
    ".htm": "text/html",
    ".xml": "application/xml",
    ".txt": "text/plain",
    ".png": "image/png",
    ".css": "text/css",
    ".js": "text/javascript",
}


@dataclass
class FileRoot:
    alias: str
    directory: str

    def __post_init__(self):
        if not os.path.isdir(self.directory):
            raise NotFound("no directory %r" % self.directory)


def content_type_for(path):
    return CONTENT_TYPES.get(os.path.splitext(path)[1].lower(),
                             "application/octet-stream")


def resolve_under_root(roots, alias, relative):
    """Canonicalize alias/relative and refuse anything escaping the root.

    Shared by the HTTP file endpoint and the peer-to-peer file service.
    """
    root = next((r for r in roots if r.alias == alias), None)
    if root is None:
        raise ForbiddenPath("no file root %r" % alias)
    relative = unquote(relative)
    if relative.startswith(("/", "\\")) or ":" in relative.split("/")[0]:
        raise ForbiddenPath("absolute paths are not served")
    base = os.path.realpath(root.directory)
    target = os.path.realpath(os.path.join(base, relative))
    if target != base and not target.startswith(base + os.sep):
        raise ForbiddenPath("path escapes root %r" % alias)
    return target


def serve_file(roots, request_path):
    """`/files/<alias>/<relative>` -> (bytes, content type)."""
    parts = request_path.split("/", 3)
    if len(parts) < 4 or parts[1] != "files" or not parts[2]:
        raise ForbiddenPath("file path must be /files/<alias>/<relative>")
    target = resolve_under_root(roots, unquote(parts[2]), parts[3])
    if not os.path.isfile(target):
        raise NotFound("no such file")
    with open(target, "rb") as fh:
        return fh.read(), content_type_for(target)


class ServiceServer:
    """HTTP server bound to one registry."""

    def __init__(self, registry, host="127.0.0.1", port=0, file_roots=(),
                 ui_dir=None):
        self.registry = registry
        self.file_roots = list(file_roots)
        self.ui_dir = ui_dir
        self._httpd = ThreadingHTTPServer((host, port), _make_handler(self))
        self._thread = None

    @property
    def port(self):
        return self._httpd.server_address[1]

    @property
    def url(self):
        host = self._httpd.server_address[0]
        return "http://%s:%d" % (host, self.port)

    def start(self):
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        daemon=True, name="http-accept")
        self._thread.start()
        return self

    def stop(self):
        self.registry.stop_behaviours()
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5.0)

    def serve_forever(self):
        self._httpd.serve_forever()

    # -- request handling, exercised directly by tests ---------------------

    def handle_service_call(self, body, path, query):
        """decode -> gate -> dispatch -> WireResponse."""
        try:
            call = wire.decode_call(body, path, query)
            record = self.registry.resolve(call.service_path)
            if not self.registry.authorize(call, record):
                raise BadPassword("password rejected by %r" % call.path_text)
            value = self.registry.dispatch(call)
            return WireResponse.success(value)
        except Fault as exc:
            return WireResponse.fault(exc.code, exc.message)
        except Exception as exc:  # defensive: the loop must survive anything
            return WireResponse.fault(500, "internal error: %s" % exc)


def _make_handler(server):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args):
            pass  # keep test output quiet

        def _send(self, status, body, content_type):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_response(self, response):
            status = 200 if response.ok else response.code
            self._send(status, wire.encode_response(response), "application/xml")

        def _read_body(self):
            length = int(self.headers.get("Content-Length") or 0)
            if length > MAX_BODY:
                return None
            return self.rfile.read(length) if length else b""

        def _route(self, body):
            split = urlsplit(self.path)
            path, query = split.path, split.query
            if path == "/meta":
                self._send(200, server.registry.network_view().encode("utf-8"),
                           "application/xml")
            elif path.startswith("/files/"):
                try:
                    data, ctype = serve_file(server.file_roots, path)
                    self._send(200, data, ctype)
                except Fault as exc:
                    self._send(exc.code, exc.message.encode("utf-8"), "text/plain")
            elif path.startswith("/ui"):
                self._serve_ui(path)
            elif path == "/service" or path.startswith("/service/"):
                self._send_response(server.handle_service_call(body, path, query))
            else:
                self._send(404, b"not found", "text/plain")

        def _serve_ui(self, path):
            if server.ui_dir is None:
                self._send(404, b"no console installed", "text/plain")
                return
            rel = path[len("/ui"):].lstrip("/") or "index.html"
            try:
                target = resolve_under_root(
                    [FileRoot("ui", server.ui_dir)], "ui", rel)
            except Fault as exc:
                self._send(exc.code, exc.message.encode("utf-8"), "text/plain")
                return
            if not os.path.isfile(target):
                self._send(404, b"not found", "text/plain")
                return
            with open(target, "rb") as fh:
                self._send(200, fh.read(), content_type_for(target))

        def do_GET(self):
            try:
                self._route(b"")
            except Exception:
                self._safe_500()

        def do_POST(self):
            try:
                body = self._read_body()
                if body is None:
                    self._send_response(WireResponse.fault(400, "request body too large"))
                    return
                self._route(body)
            except Exception:
                self._safe_500()

        def _safe_500(self):
            try:
                self._send_response(WireResponse.fault(500, "internal error"))
            except Exception:
                pass  # client went away; the accept loop lives on

    return Handler
