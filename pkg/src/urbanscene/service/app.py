"""HTTP front end: ``GET /{api_key}/{place_slug}`` returns figure JSON."""

from __future__ import annotations

import logging

from fastapi import FastAPI
from fastapi.responses import JSONResponse, Response

from ..errors import (
    AreaTooLargeError,
    BadRequestError,
    InvalidKeyError,
    PlaceNotFoundError,
)
from .config import Config, load_config
from .pipeline import SceneService

logger = logging.getLogger(__name__)

_STATUS = (
    (BadRequestError, 400),
    (InvalidKeyError, 401),
    (PlaceNotFoundError, 404),
    (AreaTooLargeError, 422),
)


def status_for(exc: Exception) -> int:
    """HTTP status for a pipeline failure; anything unlisted is an upstream failure."""
    for cls, status in _STATUS:
        if isinstance(exc, cls):
            return status
    return 502


def error_response(exc: Exception) -> JSONResponse:
    return JSONResponse({"error": str(exc) or type(exc).__name__}, status_code=status_for(exc))


def create_app(config: Config | None = None, service: SceneService | None = None) -> FastAPI:
    config = config or load_config()
    service = service or SceneService(config)
    app = FastAPI(title="urbanscene", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.service = service

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    # sync handler: FastAPI runs it in a worker thread, SceneService limits concurrency
    @app.get("/{api_key}/{place_slug}")
    def scene(api_key: str, place_slug: str):
        try:
            body = service.generate(api_key, place_slug)
        except Exception as exc:  # every failure maps to a declared status
            if status_for(exc) == 502:
                logger.exception("pipeline failed for %r", place_slug)
            return error_response(exc)
        return Response(content=body, media_type="application/json")

    @app.get("/{path:path}")
    def malformed(path: str):
        return error_response(BadRequestError(f"expected /<api_key>/<place>, got /{path}"))

    return app
