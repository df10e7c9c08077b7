"""HTTP JSON API over the session service.

Error bodies are {"error": {"code", "stage", "message"}} with 400/404/409/502
for invalid config, unknown ids, stage-order violations and backend outages.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .errors import (
    BackendError,
    CorruptStore,
    EmptyPool,
    IconixError,
    InsufficientFrames,
    InvalidConfig,
    NonMonotonicPicks,
    NotFound,
    SelectionOutOfBucket,
    StageOrderViolation,
)
from .service import Stage, SessionManager

_STATUS_BY_ERROR = [
    (StageOrderViolation, 409, "stage_order_violation"),
    (NotFound, 404, "not_found"),
    (CorruptStore, 500, "corrupt_store"),
    (BackendError, 502, "backend_unavailable"),
    (EmptyPool, 400, "empty_pool"),
    (SelectionOutOfBucket, 400, "selection_out_of_bucket"),
    (NonMonotonicPicks, 400, "non_monotonic_picks"),
    (InsufficientFrames, 400, "insufficient_frames"),
    (InvalidConfig, 400, "invalid_config"),
    (IconixError, 400, "invalid_request"),
]


def _error_response(manager: SessionManager, session_id: str | None,
                    exc: IconixError) -> JSONResponse:
    status, code = 400, "invalid_request"
    for kind, kind_status, kind_code in _STATUS_BY_ERROR:
        if isinstance(exc, kind):
            status, code = kind_status, kind_code
            break
    stage = None
    if session_id:
        try:
            stage = manager.get_session(session_id).stage.value
        except IconixError:
            stage = None
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "stage": stage, "message": str(exc)}},
    )


def create_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="iconix", version="0.1.0")

    @app.exception_handler(IconixError)
    async def iconix_error_handler(request: Request, exc: IconixError):
        session_id = request.path_params.get("session_id")
        return _error_response(manager, session_id, exc)

    @app.post("/v1/sessions")
    async def create_session(overrides: dict | None = None):
        session = manager.create_session(overrides or {})
        return session.to_json()

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        return manager.session_json(session_id)

    @app.post("/v1/sessions/{session_id}/ideate")
    async def ideate(session_id: str, payload: dict):
        return manager.advance(session_id, Stage.IDEATED, payload).to_json()

    @app.post("/v1/sessions/{session_id}/scaffold")
    async def scaffold(session_id: str, payload: dict | None = None):
        return manager.advance(session_id, Stage.SCAFFOLDED, payload or {}).to_json()

    @app.post("/v1/sessions/{session_id}/exemplars")
    async def exemplars(session_id: str, payload: dict | None = None):
        return manager.advance(session_id, Stage.EXEMPLARS_READY, payload or {}).to_json()

    @app.post("/v1/sessions/{session_id}/simplify")
    async def simplify(session_id: str, payload: dict | None = None):
        return manager.advance(session_id, Stage.SIMPLIFIED, payload or {}).to_json()

    @app.post("/v1/sessions/{session_id}/grid")
    async def grid(session_id: str, payload: dict | None = None):
        return manager.advance(session_id, Stage.GRID_READY, payload or {}).to_json()

    @app.post("/v1/sessions/{session_id}/restyle")
    async def restyle(session_id: str, payload: dict):
        variants = payload.get("variants", [])
        return manager.restyle(session_id, variants).to_json()

    @app.get("/v1/sessions/{session_id}/artifacts/{ref}")
    async def artifact(session_id: str, ref: str):
        data = manager.artifact_bytes(session_id, ref)
        return Response(content=data, media_type="image/png")

    @app.get("/v1/sessions/{session_id}/scatter/{view}")
    async def scatter(session_id: str, view: str):
        return manager.scatter_json(session_id, view)

    return app


def create_default_app() -> FastAPI:
    """App factory for `uvicorn --factory`; session root from
    ICONIX_SESSION_ROOT (default ./iconix_sessions)."""
    root = Path(os.environ.get("ICONIX_SESSION_ROOT", "iconix_sessions"))
    return create_app(SessionManager(root))
