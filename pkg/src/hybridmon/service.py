"""Session-oriented HTTP interface to the monitor.

Models are compiled once at startup and shared read-only; every session
owns its run state and serializes its own requests, so distinct sessions
proceed fully concurrently.  Idle sessions expire after a configurable
timeout (MONITOR_SESSION_TTL_SECS, default 1800 seconds).
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .errors import HybridmonError, PayloadMismatchError, UnknownActivityError
from .model import HybridProcessModel, compile_model, load_model, parse_trace_line
from .monitor import MonitorAutomaton, MonitorSession

DEFAULT_TTL_SECS = 1800.0


@dataclass
class CompiledModel:
    model: HybridProcessModel
    monitor: MonitorAutomaton


def build_registry(path: str | Path) -> dict[str, CompiledModel]:
    """Compile one model file or every *.json model in a directory."""
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise HybridmonError(f"no model files found under {path}")
    registry: dict[str, CompiledModel] = {}
    for file in files:
        model = load_model(file)
        if model.model_id in registry:
            raise HybridmonError(f"duplicate model id {model.model_id!r}")
        registry[model.model_id] = CompiledModel(model, compile_model(model))
    return registry


@dataclass
class SessionRecord:
    session_id: str
    model_id: str
    session: MonitorSession
    created: float
    last_activity: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Thread-safe session map with idle expiry."""

    def __init__(self, ttl_secs: float):
        self.ttl = ttl_secs
        self._sessions: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def create(self, model_id: str, session: MonitorSession) -> SessionRecord:
        now = time.time()
        record = SessionRecord(uuid.uuid4().hex, model_id, session, now, now)
        with self._lock:
            self._sessions[record.session_id] = record
        return record

    def get(self, session_id: str) -> SessionRecord | None:
        now = time.time()
        with self._lock:
            record = self._sessions.get(session_id)
            if record is None:
                return None
            if now - record.last_activity > self.ttl:
                del self._sessions[session_id]
                return None
            record.last_activity = now
            return record

    def delete(self, session_id: str) -> bool:
        with self._lock:
            return self._sessions.pop(session_id, None) is not None


def create_app(
    registry: dict[str, CompiledModel],
    ttl_secs: float | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    if ttl_secs is None:
        ttl_secs = float(os.environ.get("MONITOR_SESSION_TTL_SECS", DEFAULT_TTL_SECS))
    app = FastAPI(title="hybridmon")
    store = SessionStore(ttl_secs)

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    @app.get("/api/v1/models")
    def list_models() -> Any:
        return [
            {"id": compiled.model.model_id, "name": compiled.model.name}
            for compiled in registry.values()
        ]

    @app.get("/api/v1/models/{model_id}/structure")
    def model_structure(model_id: str) -> Any:
        compiled = registry.get(model_id)
        if compiled is None:
            return error(404, f"unknown model {model_id!r}")
        model = compiled.model
        activities = []
        for signature in sorted(model.signatures, key=lambda s: s.name):
            attributes = []
            for attr in sorted(signature.attributes):
                attributes.append(
                    {
                        "name": attr,
                        "labels": {
                            label: value
                            for label, value in model.enums.get(attr, {}).items()
                        },
                    }
                )
            activities.append({"name": signature.name, "attributes": attributes})
        components = [
            {
                "id": component.component_id,
                "kind": component.kind,
                "cost": component.cost,
            }
            for component in compiled.monitor.components
        ]
        return {
            "id": model.model_id,
            "name": model.name,
            "components": components,
            "activities": activities,
        }

    async def read_event(request: Request, compiled: CompiledModel):
        body = (await request.body()).decode()
        return parse_trace_line(body, 1, compiled.model)

    @app.post("/api/v1/sessions")
    async def create_session(request: Request) -> Any:
        payload = await request.json()
        model_id = payload.get("model") if isinstance(payload, dict) else None
        compiled = registry.get(model_id) if model_id else None
        if compiled is None:
            return error(404, f"unknown model {model_id!r}")
        record = store.create(model_id, MonitorSession(compiled.monitor))
        return JSONResponse(
            {
                "session": record.session_id,
                "model": model_id,
                "snapshot": record.session.current_snapshot().to_dict(),
            },
            status_code=201,
        )

    def with_session(session_id: str):
        record = store.get(session_id)
        if record is None:
            return None, error(404, f"unknown session {session_id!r}")
        return record, None

    @app.post("/api/v1/sessions/{session_id}/events")
    async def post_event(session_id: str, request: Request) -> Any:
        record, failure = with_session(session_id)
        if failure is not None:
            return failure
        compiled = registry[record.model_id]
        try:
            event = await read_event(request, compiled)
            with record.lock:
                snapshot = record.session.step(event)
        except (UnknownActivityError, PayloadMismatchError, HybridmonError) as err:
            return error(400, str(err))
        return {"snapshot": snapshot.to_dict()}

    @app.post("/api/v1/sessions/{session_id}/what-if")
    async def post_what_if(session_id: str, request: Request) -> Any:
        record, failure = with_session(session_id)
        if failure is not None:
            return failure
        compiled = registry[record.model_id]
        try:
            event = await read_event(request, compiled)
            with record.lock:
                snapshot = record.session.what_if(event)
        except (UnknownActivityError, PayloadMismatchError, HybridmonError) as err:
            return error(400, str(err))
        return {"snapshot": snapshot.to_dict()}

    @app.get("/api/v1/sessions/{session_id}/recommendations")
    def get_recommendations(session_id: str) -> Any:
        record, failure = with_session(session_id)
        if failure is not None:
            return failure
        with record.lock:
            return record.session.recommend().to_dict()

    @app.get("/api/v1/sessions/{session_id}/state")
    def get_state(session_id: str) -> Any:
        record, failure = with_session(session_id)
        if failure is not None:
            return failure
        with record.lock:
            session = record.session
            return {
                "model": record.model_id,
                "history": [
                    {"name": e.name, "attrs": e.payload_dict()} for e in session.history
                ],
                "snapshot": session.current_snapshot().to_dict(),
                "snapshots": [s.to_dict() for s in session.snapshots],
            }

    @app.delete("/api/v1/sessions/{session_id}")
    def delete_session(session_id: str) -> Any:
        if not store.delete(session_id):
            return error(404, f"unknown session {session_id!r}")
        return Response(status_code=204)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
