"""HTTP service layer.

Endpoints:

    GET  /search?query=Q[&provider=P][&keyword=true]
    POST /management/index?uri=U        (202, {"task_id": ...})
    POST /management/unindex?uri=U      (200, report)
    GET  /management/tasks
    GET  /management/plugins
    POST /management/plugins            (body {"name": ..., "enabled": ...})
    GET  /webui[?slot-id=S]
    GET  /webui/{name}/{module_file}
    GET  /dicomweb/studies?{Keyword=value...}[&limit=N]
    GET  /dicomweb/studies/{su}/series/{se}/instances/{so}
    *    /ext/{plugin}/...              (web-service plugins)

When a bearer token is configured, every /management/* request requires
it; search, DICOMweb, and the web UI surface stay open. With a static
directory configured, anything that matches no endpoint serves the
single-page app from there.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import re
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit

from ..core import Archive
from ..dicom.dictionary import dict_lookup
from ..errors import (
    BadUri,
    MiniPacsError,
    NoStorage,
    NotFound,
    QuerySyntaxError,
    UnknownPlugin,
)
from ..storage.uri import StorageUri
from .dicomjson import study_attributes, to_dicom_json

log = logging.getLogger("minipacs.http")

_WADO_PATH = re.compile(r"/dicomweb/studies/([^/]+)/series/([^/]+)/instances/([^/]+)\Z")
_WEBUI_ASSET = re.compile(r"/webui/([^/]+)/(.+)\Z")
_EXT_PATH = re.compile(r"/ext/([^/]+)(/.*)?\Z")


class HttpServer:
    """Threaded HTTP server bound to the configured port."""

    def __init__(self, archive: Archive, host: str = "0.0.0.0", port: int | None = None):
        self.archive = archive
        outer = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):  # route through our logger
                log.debug("%s " + fmt, self.client_address[0], *args)

            def do_GET(self):
                outer._handle(self, "GET")

            def do_POST(self):
                outer._handle(self, "POST")

            def do_OPTIONS(self):
                outer._send(self, 204, None, b"")

        class Server(ThreadingHTTPServer):
            daemon_threads = True

            def handle_error(self, request, client_address):
                exc = sys.exc_info()[1]
                if isinstance(exc, (ConnectionError, TimeoutError)):
                    return  # peers hanging up is routine
                log.exception("error serving %s", client_address)

        self._server = Server(
            (host, port if port is not None else archive.config.http_port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="minipacs-http", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    # --- plumbing -----------------------------------------------------------

    def _send(self, request, status: int, content_type: str | None, body: bytes) -> None:
        request.send_response(status)
        if content_type:
            request.send_header("Content-Type", content_type)
        request.send_header("Content-Length", str(len(body)))
        request.send_header("Access-Control-Allow-Origin", "*")
        request.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        request.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        request.end_headers()
        if body:
            request.wfile.write(body)

    def _json(self, request, status: int, payload) -> None:
        self._send(request, status, "application/json",
                   json.dumps(payload).encode("utf-8"))

    def _error(self, request, status: int, message: str, **extra) -> None:
        self._json(request, status, {"error": message, **extra})

    def _authorized(self, request) -> bool:
        token = self.archive.config.http_token
        if not token:
            return True
        header = request.headers.get("Authorization", "")
        return header == f"Bearer {token}"

    def _read_body(self, request) -> bytes:
        return getattr(request, "_body", b"")

    def _handle(self, request, method: str) -> None:
        # drain the body up front so keep-alive connections stay aligned
        # even when a handler responds without looking at it
        length = int(request.headers.get("Content-Length") or 0)
        request._body = request.rfile.read(length) if length else b""
        try:
            self._route(request, method)
        except MiniPacsError as exc:
            self._error(request, 500, str(exc))
        except Exception:  # noqa: BLE001 - a handler bug must not kill the server
            log.exception("unhandled error for %s %s", method, request.path)
            try:
                self._error(request, 500, "internal error")
            except OSError:
                pass

    # --- routing --------------------------------------------------------------

    def _route(self, request, method: str) -> None:
        split = urlsplit(request.path)
        path = unquote(split.path)
        params = {k: v[-1] for k, v in parse_qs(split.query, keep_blank_values=True).items()}

        if ".." in path.split("/"):
            return self._error(request, 400, "path traversal rejected")

        if path.startswith("/management/"):
            if not self._authorized(request):
                return self._error(request, 401, "missing or invalid token")
            return self._management(request, method, path, params)

        if method == "GET" and path == "/search":
            return self._search(request, params)
        if method == "GET" and path == "/webui":
            return self._webui_list(request, params)
        if method == "GET" and (m := _WEBUI_ASSET.match(path)):
            return self._webui_asset(request, m.group(1), m.group(2))
        if method == "GET" and path == "/dicomweb/studies":
            return self._qido(request, params)
        if method == "GET" and (m := _WADO_PATH.match(path)):
            return self._wado(request, m.group(1), m.group(2), m.group(3))
        if m := _EXT_PATH.match(path):
            return self._ext(request, method, m.group(1), m.group(2) or "/", params)
        if method == "GET" and self.archive.config.http_static:
            return self._static(request, path)
        return self._error(request, 404, f"no such resource: {path}")

    # --- endpoints ----------------------------------------------------------------

    def _search(self, request, params: dict[str, str]) -> None:
        query = params.get("query", "")
        if not query:
            return self._error(request, 400, "query parameter is required", position=0)
        provider = params.get("provider")
        passthrough = {k: v for k, v in params.items()
                       if k not in ("query", "provider")}
        try:
            result = self.archive.query(query, provider=provider, parameters=passthrough)
        except UnknownPlugin:
            return self._error(request, 404, f"no query provider named {provider!r}")
        except QuerySyntaxError as exc:
            return self._error(request, 400, exc.reason, position=exc.position)
        self._json(request, 200, {
            "results": [
                {"uri": str(h.uri), "score": h.score, "fields": h.fields}
                for h in result.hits
            ],
            "num_results": result.total,
            "elapsed": result.elapsed_ms,
        })

    def _management(self, request, method: str, path: str, params: dict[str, str]) -> None:
        if method == "POST" and path == "/management/index":
            try:
                uri = StorageUri.parse(params.get("uri", ""))
            except BadUri as exc:
                return self._error(request, 400, str(exc))
            try:
                handle = self.archive.dispatch_index([uri], parameters=params)
            except NoStorage as exc:
                return self._error(request, 404, str(exc))
            return self._json(request, 202, {"task_id": handle.id})

        if method == "POST" and path == "/management/unindex":
            try:
                uri = StorageUri.parse(params.get("uri", ""))
            except BadUri as exc:
                return self._error(request, 400, str(exc))
            report = self.archive.dispatch_unindex(uri)
            return self._json(request, 200, report.as_json())

        if method == "GET" and path == "/management/tasks":
            return self._json(request, 200,
                              {"tasks": [t.as_json() for t in self.archive.tasks()]})

        if method == "GET" and path == "/management/plugins":
            return self._json(request, 200, {
                "plugins": [m.as_json() for m in self.archive.registry.manifests()]})

        if method == "POST" and path == "/management/plugins":
            try:
                body = json.loads(self._read_body(request) or b"{}")
                name = body["name"]
                enabled = bool(body["enabled"])
            except (json.JSONDecodeError, KeyError, TypeError):
                return self._error(request, 400, 'body must be {"name": ..., "enabled": ...}')
            try:
                self.archive.set_plugin_enabled(name, enabled)
            except UnknownPlugin:
                return self._error(request, 404, f"no plugin named {name!r}")
            return self._json(request, 200, {"name": name, "enabled": enabled})

        return self._error(request, 404, f"no such resource: {path}")

    def _webui_list(self, request, params: dict[str, str]) -> None:
        slot_id = params.get("slot-id")
        descriptors = self.archive.webui_descriptors(slot_id)
        self._json(request, 200, {"plugins": [d.as_json() for d in descriptors]})

    def _webui_asset(self, request, name: str, module_file: str) -> None:
        data = self.archive.registry.webui_asset(name, module_file)
        if data is None:
            return self._error(request, 404, f"no module {module_file!r} in plugin {name!r}")
        self._send(request, 200, "application/javascript", data)

    def _qido(self, request, params: dict[str, str]) -> None:
        limit: int | None = None
        filters: list[tuple[str, str]] = []
        for key, value in params.items():
            if key in ("limit", "offset"):
                try:
                    parsed = int(value)
                except ValueError:
                    return self._error(request, 400, f"{key} must be an integer")
                if key == "limit":
                    limit = parsed
                continue
            entry = dict_lookup(key)
            if entry is None:
                return self._error(request, 400, f"unknown attribute keyword {key!r}")
            if value:
                filters.append((key, value))
        studies = self.archive.find_studies(filters, limit=limit)
        payload = [
            to_dicom_json(study_attributes(s.study_uid, s.fields, s.modalities))
            for s in studies
        ]
        self._json(request, 200, payload)

    def _wado(self, request, study_uid: str, series_uid: str, sop_uid: str) -> None:
        uri = self.archive.instance_uri(study_uid, series_uid, sop_uid)
        if uri is None:
            return self._error(request, 404, "no such instance")
        try:
            data = self.archive.router.at(uri)
        except (NotFound, NoStorage):
            return self._error(request, 404, "no such instance")
        self._send(request, 200, "application/dicom", data)

    def _ext(self, request, method: str, plugin_name: str, subpath: str,
             params: dict[str, str]) -> None:
        plugin = self.archive.web_service(plugin_name)
        if plugin is None:
            return self._error(request, 404, f"no web service named {plugin_name!r}")
        body = self._read_body(request) if method == "POST" else b""
        answer = plugin.handle(method, subpath, params, body)
        if answer is None:
            return self._error(request, 404, f"no such resource: {subpath}")
        status, content_type, payload = answer
        self._send(request, status, content_type, payload)

    def _static(self, request, path: str) -> None:
        base = Path(self.archive.config.http_static).resolve()
        name = path.lstrip("/") or "index.html"
        target = (base / name).resolve()
        if not target.is_relative_to(base) or not target.is_file():
            # single-page app fallback keeps client-side routes working
            target = base / "index.html"
            if not target.is_file():
                return self._error(request, 404, f"no such resource: {path}")
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(request, 200, content_type, target.read_bytes())
