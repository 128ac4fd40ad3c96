"""HTTP session service: one command per request, one clip per command.

Mock-backed sessions answer from a script derived from the bundled dataset
(non-strict, so unscripted commands fall through to the invalid path); live
sessions talk to the configured model server. Requests to one session are
serialized; distinct sessions are independent.
"""

from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import resources
from .agents import iv
from .errors import TransportError
from .evaluation import load_dataset
from .llm import LiveBackend, MockBackend, MockScript
from .model import FunctionId
from .scripting import build_mock_script
from .session import Session, SessionConfig
from .stages import QueueSource


class CreateSessionRequest(BaseModel):
    backend: str = "mock"
    mock_script: str | None = None
    dataset: str | None = None
    column_manifest: str | None = None
    patient_record: str | None = None
    structure_manifest: str | None = None
    volume: str | None = None
    llm_url: str | None = None
    llm_model: str | None = None
    fps: int = 30
    ic_max: int = 3


class CommandRequest(BaseModel):
    text: str | None = None
    absent: bool = False


class _Entry:
    def __init__(self, session: Session, source: QueueSource):
        self.session = session
        self.source = source
        self.lock = threading.Lock()


def _build_backend(req: CreateSessionRequest):
    if req.backend == "live":
        return LiveBackend(url=req.llm_url, model=req.llm_model)
    if req.backend != "mock":
        raise HTTPException(status_code=422, detail=f"unknown backend {req.backend!r}")
    if req.mock_script:
        try:
            script = MockScript.from_jsonl(req.mock_script, strict=False)
        except OSError as exc:
            raise HTTPException(status_code=422, detail=f"mock script unreadable: {exc}") from exc
    else:
        dataset = req.dataset or resources.dataset_path()
        try:
            records = load_dataset(dataset)
        except OSError as exc:
            raise HTTPException(status_code=422, detail=f"dataset unreadable: {exc}") from exc
        script = build_mock_script(records, strict=False)
    return MockBackend(script)


def _load_fixtures(req: CreateSessionRequest) -> dict:
    """Optional per-session fixture overrides, loaded from the given paths."""
    import json

    from .agents.ar import StructureManifest
    from .agents.ir import ColumnManifest

    fixtures: dict = {}
    if req.column_manifest:
        with open(req.column_manifest, encoding="utf-8") as fh:
            fixtures["column_manifest"] = ColumnManifest.from_dict(json.load(fh))
    if req.patient_record:
        with open(req.patient_record, encoding="utf-8") as fh:
            record = json.load(fh)
            record.pop("_comment", None)
            fixtures["patient_record"] = record
    if req.structure_manifest:
        with open(req.structure_manifest, encoding="utf-8") as fh:
            fixtures["structure_manifest"] = StructureManifest.from_dict(json.load(fh))
    if req.volume:
        fixtures["volume"] = iv.Volume.load(req.volume)
    return fixtures


def create_app() -> FastAPI:
    app = FastAPI(title="visa-session-service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, _Entry] = {}

    def entry_for(session_id: str) -> _Entry:
        entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return entry

    @app.get("/healthz")
    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest) -> dict[str, str]:
        backend = _build_backend(req)
        source = QueueSource()
        try:
            fixtures = _load_fixtures(req)
        except (OSError, ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=f"bad fixture file: {exc}") from exc
        session = Session(
            backend=backend,
            source=source,
            config=SessionConfig(fps=req.fps, ic_max=req.ic_max),
            **fixtures,
        )
        sessions[session.id] = _Entry(session, source)
        return {"id": session.id}

    @app.post("/sessions/{session_id}/command")
    def submit_command(session_id: str, req: CommandRequest) -> dict[str, Any]:
        entry = entry_for(session_id)
        if not req.absent and not req.text:
            raise HTTPException(status_code=422, detail="provide text or absent=true")
        with entry.lock:
            entry.source.push(None if req.absent else req.text)
            try:
                result = entry.session.run_one_clip()
            except TransportError as exc:
                raise HTTPException(status_code=503, detail=str(exc)) from exc
            payload = result.to_dict()
            payload["clip"] = result.trace.clip
            payload["ic"] = result.trace.invalid_cycles
            payload["status"] = entry.session.state.status.value
            payload["state"] = entry.session.state_snapshot()
            return payload

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict[str, Any]:
        entry = entry_for(session_id)
        with entry.lock:
            return entry.session.state_snapshot()

    @app.post("/sessions/{session_id}/reset")
    def reset_session(session_id: str) -> dict[str, Any]:
        entry = entry_for(session_id)
        with entry.lock:
            entry.session.reset()
            return {"ok": True, "id": session_id}

    @app.get("/sessions/{session_id}/slices/{plane}")
    def slice_image(session_id: str, plane: str) -> Response:
        entry = entry_for(session_id)
        if plane not in iv.PLANES:
            raise HTTPException(status_code=422, detail=f"unknown plane {plane!r}")
        with entry.lock:
            session = entry.session
            state: iv.IvState = session.state.agent_states[FunctionId.IV_AGENT]
            index = state.positions[plane]
            image = iv.slice_volume(session.volume, plane, index)
            png = iv.pack_slice_png(image[::4, ::4] if min(image.shape) >= 64 else image)
        return Response(content=png, media_type="image/png")

    return app


app = create_app()
