"""HTTP host for the peak-cleaning tool.

Endpoints (all JSON):
  GET  /api/sessions                                   -> session listing
  GET  /api/session/{id}/signal?from=&to=&max_points=  -> decimated samples
  GET  /api/session/{id}/peaks                         -> peaks + blanks + version
  POST /api/session/{id}/edit                          -> {edit, expected_version}
  GET  /api/session/{id}/rr                            -> RR-interval sequence
  POST /api/session/{id}/export                        -> annotation document

Static UI assets are served from an optional assets directory. Sessions are
persisted to the store directory on shutdown and restored on startup.
"""

from __future__ import annotations

import json
import logging
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .annotation import AnnotationSession, PeakEdit
from .errors import EditError, PulsecamError, ValidationError, VersionConflictError
from .trace_io import parse_gt_waveform

logger = logging.getLogger(__name__)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript",
    ".css": "text/css",
    ".map": "application/json",
}

_PLACEHOLDER_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>pulsecam annotator</title></head>
<body><h1>pulsecam annotator</h1>
<p>No UI assets bundled; the JSON API is live under /api/.</p></body></html>
"""


def decimate_minmax(times: np.ndarray, values: np.ndarray, max_points: int) -> list[list[float]]:
    """Min/max per bucket, emitted in time order; raw when already small."""
    n = len(values)
    if n <= max_points:
        return [[float(t), float(v)] for t, v in zip(times, values)]
    n_buckets = max(1, max_points // 2)
    edges = np.linspace(0, n, n_buckets + 1).astype(int)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        seg = values[lo:hi]
        i_min, i_max = int(np.argmin(seg)), int(np.argmax(seg))
        for i in sorted({i_min, i_max}):
            out.append([float(times[lo + i]), float(seg[i])])
    return out


class AnnotationService:
    """Session registry with per-session write locks and a file-backed store."""

    def __init__(self, store_dir: str | Path | None = None):
        self.store_dir = Path(store_dir) if store_dir else None
        self.sessions: dict[str, AnnotationSession] = {}
        self._locks: dict[str, threading.Lock] = {}

    def add_signal(self, signal_path: str | Path, session_id: str | None = None) -> str:
        path = Path(signal_path)
        record = parse_gt_waveform(path.read_bytes())
        sid = session_id or path.stem
        stored = self._stored_state(sid)
        if stored is not None:
            session = AnnotationSession.restore(stored, record)
            logger.info("restored session %s at version %d", sid, session.version)
        else:
            session = AnnotationSession(sid, record)
            logger.info("created session %s with %d proposed peaks", sid, len(session.peaks))
        self.register(session)
        return sid

    def register(self, session: AnnotationSession):
        self.sessions[session.session_id] = session
        self._locks[session.session_id] = threading.Lock()

    def _stored_state(self, session_id: str) -> dict | None:
        if self.store_dir is None:
            return None
        path = self.store_dir / f"{session_id}.session.json"
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ValidationError(f"corrupt session store {path}: {e}") from None

    def persist(self):
        if self.store_dir is None:
            return
        self.store_dir.mkdir(parents=True, exist_ok=True)
        for sid, session in self.sessions.items():
            path = self.store_dir / f"{sid}.session.json"
            path.write_text(json.dumps(session.state_dict(), indent=1))
            session.dirty = False
        logger.info("persisted %d session(s)", len(self.sessions))

    def get(self, session_id: str) -> AnnotationSession:
        if session_id not in self.sessions:
            raise KeyError(session_id)
        return self.sessions[session_id]

    def lock(self, session_id: str) -> threading.Lock:
        return self._locks[session_id]


def _make_handler(service: AnnotationService, assets_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            logger.debug("http: " + fmt, *args)

        def _send_json(self, obj, status=200):
            body = json.dumps(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, status, message):
            self._send_json({"error": message}, status=status)

        def _route(self):
            parsed = urllib.parse.urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            query = urllib.parse.parse_qs(parsed.query)
            return parts, query

        def do_GET(self):
            parts, query = self._route()
            try:
                if parts[:2] == ["api", "sessions"] or parts == ["api", "sessions"]:
                    self._send_json({
                        "sessions": [
                            {"id": sid, "version": s.version, "n_peaks": len(s.peaks),
                             "kind": s.waveform.kind,
                             "t0": s.waveform.waveform.t0,
                             "duration_s": s.waveform.waveform.duration,
                             "rate_hz": s.waveform.waveform.rate}
                            for sid, s in service.sessions.items()
                        ]
                    })
                elif len(parts) == 4 and parts[:2] == ["api", "session"]:
                    session = service.get(parts[2])
                    self._handle_session_get(session, parts[3], query)
                else:
                    self._serve_static(parts)
            except KeyError:
                self._send_error_json(404, f"no such session")
            except PulsecamError as e:
                self._send_error_json(400, str(e))

        def _handle_session_get(self, session, leaf, query):
            wf = session.waveform.waveform
            if leaf == "signal":
                t_from = float(query.get("from", [wf.t0])[0])
                t_to = float(query.get("to", [wf.t0 + wf.duration])[0])
                max_points = int(query.get("max_points", [2000])[0])
                times = wf.times()
                mask = (times >= t_from) & (times <= t_to)
                pts = decimate_minmax(times[mask], wf.values[mask], max_points)
                self._send_json({"rate_hz": wf.rate, "points": pts})
            elif leaf == "peaks":
                self._send_json({
                    "version": session.version,
                    "peaks": session.peaks,
                    "blank_regions": [list(r) for r in session.blank_regions],
                })
            elif leaf == "rr":
                self._send_json({"version": session.version, "rr": session.rr_intervals()})
            else:
                self._send_error_json(404, f"unknown endpoint {leaf!r}")

        def do_POST(self):
            parts, _ = self._route()
            if len(parts) != 4 or parts[:2] != ["api", "session"]:
                self._send_error_json(404, "unknown endpoint")
                return
            try:
                session = service.get(parts[2])
            except KeyError:
                self._send_error_json(404, "no such session")
                return
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                payload = json.loads(raw or b"{}")
            except json.JSONDecodeError:
                self._send_error_json(400, "request body is not JSON")
                return
            leaf = parts[3]
            try:
                if leaf == "edit":
                    edit = PeakEdit.from_dict(payload["edit"])
                    expected = payload.get("expected_version")
                    with service.lock(session.session_id):
                        session.apply_edit(edit, expected)
                        self._send_json({
                            "version": session.version,
                            "peaks": session.peaks,
                            "blank_regions": [list(r) for r in session.blank_regions],
                        })
                elif leaf == "export":
                    with service.lock(session.session_id):
                        doc = session.export_annotations()
                    service.persist()
                    self._send_json(json.loads(doc))
                else:
                    self._send_error_json(404, f"unknown endpoint {leaf!r}")
            except VersionConflictError as e:
                self._send_error_json(409, str(e))
            except (EditError, ValidationError, KeyError) as e:
                self._send_error_json(400, str(e))

        def _serve_static(self, parts):
            rel = "/".join(parts) or "index.html"
            if assets_dir is not None:
                candidate = (assets_dir / rel).resolve()
                if candidate.is_file() and assets_dir.resolve() in candidate.parents:
                    body = candidate.read_bytes()
                    ctype = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
                    self.send_response(200)
                    self.send_header("Content-Type", ctype)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return
            if rel == "index.html":
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(_PLACEHOLDER_PAGE)))
                self.end_headers()
                self.wfile.write(_PLACEHOLDER_PAGE)
            else:
                self._send_error_json(404, f"not found: /{rel}")

    return Handler


class AnnotatorServer:
    """Owns the HTTP server thread; persists sessions on shutdown."""

    def __init__(self, service: AnnotationService, port: int = 0,
                 assets_dir: str | Path | None = None, host: str = "127.0.0.1"):
        self.service = service
        handler = _make_handler(service, Path(assets_dir) if assets_dir else None)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self):
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        logger.info("annotator listening on port %d", self.port)

    def shutdown(self):
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)
        self.service.persist()

    def serve_forever(self):
        try:
            self.httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self.httpd.server_close()
            self.service.persist()
