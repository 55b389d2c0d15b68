"""HTTP front of the session store.

Endpoints:

    POST /sessions                 create (optional ?from=id,step to fork)
    GET  /sessions/{id}            session record with all steps
    POST /sessions/{id}/instructions   run one instruction, return the step
    GET  /sessions/{id}/steps/{n}  one step record
    GET  /artifacts/{digest}       content-addressed artifact bytes

Step records carry artifact URLs so clients never touch the store's paths.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse
from pydantic import BaseModel

from .pipeline import PipelineConfig
from .session import SessionError, SessionStore, StepRecord

_MEDIA_TYPES = {
    ".png": "image/png",
    ".json": "application/json",
    ".npy": "application/octet-stream",
    ".obj": "text/plain; charset=utf-8",
    ".mtl": "text/plain; charset=utf-8",
    ".css": "text/plain; charset=utf-8",
    ".txt": "text/plain; charset=utf-8",
}


class InstructionBody(BaseModel):
    instruction: str


def _step_json(step: StepRecord) -> dict:
    out = step.to_json()
    for rec in out["bindings"]:
        rec["url"] = f"/artifacts/{rec['digest']}"
    return out


def _session_json(store: SessionStore, session_id: str) -> dict:
    state = store.load(session_id)
    return {"id": state.id,
            "steps": [_step_json(s) for s in state.steps],
            "bindings": {name: {"type": rec.type, "digest": rec.digest,
                                "url": f"/artifacts/{rec.digest}"}
                         for name, rec in state.bindings.items()}}


def create_app(store: SessionStore, config_factory=PipelineConfig) -> FastAPI:
    """App over one store; `config_factory` builds a fresh PipelineConfig
    per instruction (backend/grid selection lives there)."""
    app = FastAPI(title="roomsynth session service")

    @app.post("/sessions", status_code=201)
    def create_session(from_: str | None = Query(None, alias="from")):
        """No params: fresh session.  ?from=id,step forks at that step."""
        if from_ is None:
            return _session_json(store, store.create())
        src, _, step_text = from_.partition(",")
        try:
            step = int(step_text) if step_text else None
        except ValueError:
            raise HTTPException(400, "from must be 'session_id,step'")
        try:
            forked = store.create(from_session=src, from_step=step)
        except SessionError as exc:
            code = 404 if "unknown session" in str(exc) else 400
            raise HTTPException(code, str(exc)) from exc
        return _session_json(store, forked)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return _session_json(store, session_id)
        except SessionError as exc:
            raise HTTPException(404, str(exc)) from exc

    @app.post("/sessions/{session_id}/instructions")
    def run_instruction(session_id: str, body: InstructionBody):
        if not body.instruction.strip():
            raise HTTPException(400, "instruction must be non-empty")
        try:
            step = store.run_instruction(session_id, body.instruction,
                                         config_factory())
        except SessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        return _step_json(step)

    @app.get("/sessions/{session_id}/steps/{n}")
    def get_step(session_id: str, n: int):
        try:
            state = store.load(session_id)
        except SessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        if not 1 <= n <= len(state.steps):
            raise HTTPException(404, f"session {session_id} has no step {n}")
        return _step_json(state.steps[n - 1])

    @app.get("/artifacts/{digest}")
    def get_artifact(digest: str):
        try:
            path = store.artifacts.find(digest)
        except SessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        media = _MEDIA_TYPES.get(path.suffix, "application/octet-stream")
        return FileResponse(path, media_type=media,
                            headers={"Cache-Control":
                                     "public, max-age=31536000, immutable"})

    return app
