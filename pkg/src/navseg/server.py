"""Live segment-serving service.

Implements the position-report / navigation-ball delivery protocol over
HTTP + JSON. A client reports its view index every few moves; the server
answers with the ids of segments whose membership intersects the client's
navigation ball and that the session has not received yet, and the client
then fetches those segment payloads.

Payloads carry the decoded reference (what the codec reproduces, not the
pristine render) so every consumer of the service renders from the same
data a bitstream decoder would hold.
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from .codec import decode_aux, decode_reference, encode_aux, encode_reference
from .navdomain import NavigationDomain, navigation_ball
from .partition import Partition
from .render import ViewCache

__all__ = ["SessionState", "SegmentService", "make_http_server", "run_server"]


@dataclass
class SessionState:
    """Per-client delivery record.

    delivered only grows; pending holds ids announced by a position report
    but not fetched yet, so an identical repeat report returns nothing.
    Byte counters track exactly the payload bytes served to this session.
    """

    session_id: str
    current_view: int = -1
    delivered: set = field(default_factory=set)
    pending: set = field(default_factory=set)
    bytes_sent: int = 0
    requests: int = 0
    segments_delivered: int = 0
    reports: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def snapshot(self) -> dict:
        return {
            "session": self.session_id,
            "view": self.current_view,
            "bytes": self.bytes_sent,
            "requests": self.requests,
            "segments": self.segments_delivered,
            "reports": self.reports,
            "delivered_ids": sorted(self.delivered),
        }


class SegmentService:
    """Transport-free protocol core: domain info, reports, fetches, stats.

    Segment payloads are encoded once, serialized to canonical JSON bytes
    and cached, so byte accounting is reproducible across sessions. The
    partition and scene are never mutated after construction; sessions are
    the only mutable state and each is guarded by its own lock.
    """

    def __init__(self, cache: ViewCache, partition: Partition, n_t: int, q: float):
        if n_t < 1:
            raise ValueError("n_t must be at least 1")
        self.cache = cache
        self.domain: NavigationDomain = cache.domain
        self.partition = partition
        self.n_t = int(n_t)
        self.q = float(q)
        self._seg_of = partition.segment_of()
        self._sessions: dict = {}
        self._registry_lock = threading.Lock()
        self._payloads: dict = {}
        self._payload_lock = threading.Lock()

    # ---- sessions ----

    def _session(self, session_id: str) -> SessionState:
        with self._registry_lock:
            state = self._sessions.get(session_id)
            if state is None:
                state = SessionState(session_id)
                self._sessions[session_id] = state
            return state

    # ---- protocol operations ----

    def domain_info(self) -> dict:
        d = self.domain
        return {
            "rows": d.rows,
            "cols": d.cols,
            "delta": d.delta,
            "n_t": self.n_t,
            "intrinsics": d.intrinsics.to_json(),
            "poses": [p.to_json() for p in d.poses],
            "popularity": [float(x) for x in d.popularity],
            "segments": [
                {
                    "id": i,
                    "reference": s.reference,
                    "members": [int(m) for m in s.members],
                    "ref_bits": s.ref_bits,
                    "aux_bits": s.aux_bits,
                }
                for i, s in enumerate(self.partition.segments)
            ],
        }

    def position_report(self, session_id: str, view: int) -> list:
        """Segment ids the session must fetch to cover B(view, n_t * delta)."""
        view = int(view)
        if not (0 <= view < self.domain.size):
            raise IndexError(f"view index {view} out of range")
        ball = navigation_ball(self.domain, view, self.n_t)
        needed = set(int(s) for s in self._seg_of[ball])
        state = self._session(session_id)
        with state.lock:
            state.current_view = view
            state.requests += 1
            state.reports += 1
            fetch = sorted(needed - state.delivered - state.pending)
            state.pending.update(fetch)
        return fetch

    def segment_payload(self, seg_id: int) -> bytes:
        """Canonical JSON bytes for one segment; encoded on first use."""
        seg_id = int(seg_id)
        if not (0 <= seg_id < len(self.partition.segments)):
            raise KeyError(f"no segment {seg_id}")
        with self._payload_lock:
            body = self._payloads.get(seg_id)
            if body is None:
                body = self._build_payload(seg_id)
                self._payloads[seg_id] = body
            return body

    def record_fetch(self, session_id: str, seg_id: int, nbytes: int) -> None:
        state = self._session(session_id)
        with state.lock:
            state.requests += 1
            state.segments_delivered += 1
            state.bytes_sent += int(nbytes)
            state.pending.discard(int(seg_id))
            state.delivered.add(int(seg_id))

    def stats(self, session_id: str | None = None) -> dict:
        with self._registry_lock:
            states = list(self._sessions.values())
        sessions = {}
        for s in states:
            with s.lock:
                sessions[s.session_id] = s.snapshot()
        agg = {
            "bytes": sum(s["bytes"] for s in sessions.values()),
            "requests": sum(s["requests"] for s in sessions.values()),
            "segments": sum(s["segments"] for s in sessions.values()),
            "sessions": len(sessions),
        }
        if session_id is not None:
            one = sessions.get(session_id)
            if one is None:
                one = SessionState(session_id).snapshot()
            return {"session": one, "aggregate": agg}
        return {"sessions": sessions, "aggregate": agg}

    # ---- payload assembly ----

    def _build_payload(self, seg_id: int) -> bytes:
        seg = self.partition.segments[seg_id]
        ref = decode_reference(encode_reference(self.cache.view(seg.reference), self.q))
        aux = decode_aux(encode_aux(self.cache, seg.innovation, self.q))
        depth_mm = np.round(ref.depth * 1000.0).astype(np.uint16)
        doc = {
            "id": seg_id,
            "reference": {
                "view": seg.reference,
                "pose": ref.pose.to_json(),
                "width": ref.intrinsics.width,
                "height": ref.intrinsics.height,
                "color_b64": base64.b64encode(np.ascontiguousarray(ref.color).tobytes()).decode(),
                "depth_b64": base64.b64encode(depth_mm.astype("<u2").tobytes()).decode(),
            },
            "aux": [
                {
                    "id": int(i),
                    "pos": [round(float(x), 6) for x in p],
                    "color": [int(c) for c in col],
                }
                for i, p, col in zip(aux.ids, aux.positions, aux.colors)
            ],
            "ref_bits": seg.ref_bits,
            "aux_bits": seg.aux_bits,
        }
        return json.dumps(doc, separators=(",", ":")).encode()


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".mjs": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


class _Handler(BaseHTTPRequestHandler):
    """Routes HTTP requests onto the shared SegmentService."""

    protocol_version = "HTTP/1.1"
    service: SegmentService = None
    static_dir: Path | None = None
    quiet = True

    # ---- plumbing ----

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    def _send(self, status: int, body: bytes, ctype: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc) -> None:
        self._send(status, json.dumps(doc, separators=(",", ":")).encode())

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    # ---- methods ----

    def do_OPTIONS(self):
        self._send(204, b"")

    def do_GET(self):
        url = urlparse(self.path)
        query = parse_qs(url.query)
        parts = [p for p in url.path.split("/") if p]
        try:
            if parts[:2] == ["api", "domain"] and len(parts) == 2:
                self._send(200, json.dumps(self.service.domain_info(), separators=(",", ":")).encode())
            elif parts[:2] == ["api", "segment"] and len(parts) == 3:
                self._segment(parts[2], query)
            elif parts[:2] == ["api", "stats"] and len(parts) == 2:
                session = query.get("session", [None])[0]
                self._send_json(200, self.service.stats(session))
            elif parts[:1] == ["api"]:
                self._error(404, f"unknown endpoint {url.path}")
            else:
                self._static(url.path)
        except BrokenPipeError:
            pass

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if parts != ["api", "position"]:
            self._error(404, f"unknown endpoint {url.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            doc = json.loads(self.rfile.read(length) or b"{}")
            session = doc["session"]
            view = int(doc["view"])
        except (KeyError, TypeError, ValueError):
            self._error(400, "body must be JSON {session, view}")
            return
        if not isinstance(session, str) or not session:
            self._error(400, "session must be a non-empty string")
            return
        try:
            fetch = self.service.position_report(session, view)
        except IndexError as e:
            self._error(400, str(e))
            return
        self._send_json(200, {"fetch": fetch})

    # ---- route helpers ----

    def _segment(self, raw_id: str, query) -> None:
        try:
            seg_id = int(raw_id)
        except ValueError:
            self._error(400, f"segment id must be an integer, got {raw_id!r}")
            return
        try:
            body = self.service.segment_payload(seg_id)
        except KeyError:
            self._error(404, f"no segment {seg_id}")
            return
        session = query.get("session", [None])[0]
        if session:
            self.service.record_fetch(session, seg_id, len(body))
        self._send(200, body)

    def _static(self, path: str) -> None:
        root = self.static_dir
        if root is None:
            self._error(404, "no static content configured; API lives under /api/")
            return
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._error(404, f"not found: {path}")
            return
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)


def make_http_server(
    service: SegmentService,
    port: int = 8080,
    host: str = "127.0.0.1",
    static_dir: str | Path | None = None,
    quiet: bool = True,
) -> ThreadingHTTPServer:
    """Bind a threaded HTTP server around the service; port 0 picks a free one."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "service": service,
            "static_dir": Path(static_dir) if static_dir else None,
            "quiet": quiet,
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def run_server(service: SegmentService, port: int, host: str = "0.0.0.0", static_dir=None) -> None:
    """Serve until interrupted; used by the command line entry point."""
    httpd = make_http_server(service, port=port, host=host, static_dir=static_dir, quiet=False)
    addr = httpd.server_address
    print(f"serving {len(service.partition.segments)} segments on http://{addr[0]}:{addr[1]}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
