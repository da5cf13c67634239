"""FastAPI wiring around the handler functions.

Domain errors map to HTTP 400 with a structured body
``{"error": {"kind": "config" | "numeric", "message": ...}}`` so clients can
distinguish usage errors from numeric failures; malformed request bodies get
FastAPI's native 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from ..errors import ConfigError, NumericsError
from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="biphoton-pmd",
        description="Concurrence of polarization-entangled photon pairs under "
                    "first-order PMD, and optimal nonlocal compensation.",
        version="0.1.0",
    )

    @app.exception_handler(ConfigError)
    async def _config_error(_: Request, exc: ConfigError) -> JSONResponse:
        return JSONResponse(status_code=400,
                            content={"error": {"kind": "config", "message": str(exc)}})

    @app.exception_handler(NumericsError)
    async def _numerics_error(_: Request, exc: NumericsError) -> JSONResponse:
        return JSONResponse(status_code=400,
                            content={"error": {"kind": "numeric", "message": str(exc)}})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/concurrence", response_model=schemas.ConcurrenceResponse,
              response_model_exclude_none=True)
    def concurrence(req: schemas.ConcurrenceRequest) -> schemas.ConcurrenceResponse:
        return handlers.handle_concurrence(req)

    @app.post("/optimize", response_model=schemas.OptimizeResponse,
              response_model_exclude_none=True)
    def optimize(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
        return handlers.handle_optimize(req)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        return handlers.handle_sweep(req)

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
        return handlers.handle_validate(req)

    @app.post("/jsa", response_class=PlainTextResponse)
    def jsa_dump(req: schemas.JsaDumpRequest) -> PlainTextResponse:
        return PlainTextResponse(handlers.handle_jsa_dump(req), media_type="text/csv")

    return app


app = create_app()
