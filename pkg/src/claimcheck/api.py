"""HTTP surface over the detection runtime.

Endpoints:
  POST /v1/detect         verify one claim, optionally overriding knobs
  POST /v1/corpus/ingest  add documents (raw JSONL body, or {"path": ...})
  GET  /v1/corpus/stats   corpus and index counts
  GET  /healthz           liveness plus template checksums

Errors always serialize as {"code", "message", "detail"} with a 4xx for
caller mistakes and 502 for upstream model failures.
"""

from __future__ import annotations

import json
import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__, kernels
from .errors import ClaimcheckError, GatewayError, ValidationError
from .service import Runtime

logger = logging.getLogger(__name__)


class ConfigOverrides(BaseModel):
    model_config = ConfigDict(extra="forbid")

    top_k: int | None = Field(default=None, ge=1)
    similarity_threshold: float | None = Field(default=None, ge=-1.0, le=1.0)
    n_keyword_docs: int | None = Field(default=None, ge=1)
    n_vector_chunks: int | None = Field(default=None, ge=1)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class DetectBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    claim: str
    config: ConfigOverrides | None = None


def _error_payload(code: str, message: str, detail: object = None) -> dict:
    return {"code": code, "message": message, "detail": detail}


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="claimcheck", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def _on_request_validation(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in e.get("loc", ())], "msg": str(e.get("msg", ""))}
            for e in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content=_error_payload(
                "invalid_request", "request failed validation", detail
            ),
        )

    @app.exception_handler(ValidationError)
    async def _on_validation(request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=400,
            content=_error_payload(exc.code, exc.message, exc.detail),
        )

    @app.exception_handler(GatewayError)
    async def _on_gateway(request: Request, exc: GatewayError):
        return JSONResponse(
            status_code=502,
            content=_error_payload(exc.code, exc.message, exc.detail),
        )

    @app.exception_handler(ClaimcheckError)
    async def _on_internal(request: Request, exc: ClaimcheckError):
        logger.exception("unhandled application error")
        return JSONResponse(
            status_code=500,
            content=_error_payload(exc.code, exc.message, None),
        )

    @app.post("/v1/detect")
    def detect(body: DetectBody) -> dict:
        overrides = body.config.as_dict() if body.config else None
        result = runtime.detector.detect(body.claim, overrides)
        return result.as_dict()

    @app.post("/v1/corpus/ingest")
    async def ingest(request: Request) -> dict:
        content_type = request.headers.get("content-type", "")
        raw = await request.body()
        if "application/json" in content_type:
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError:
                raise ValidationError("request body is not valid JSON")
            if (
                not isinstance(payload, dict)
                or set(payload) != {"path"}
                or not isinstance(payload["path"], str)
            ):
                raise ValidationError(
                    'JSON ingest body must be {"path": "<corpus file>"}'
                )
            summary = runtime.ingest_file(payload["path"])
        else:
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError:
                raise ValidationError("ingest body must be UTF-8 JSONL")
            if not text.strip():
                raise ValidationError("ingest body is empty")
            summary = runtime.ingest_text(text)
        return summary.as_dict()

    @app.get("/v1/corpus/stats")
    def stats() -> dict:
        return {
            "documents": runtime.corpus.doc_count,
            "chunks": runtime.corpus.chunk_count,
            "vector_entries": len(runtime.vectors),
            "embedding_dimension": runtime.vectors.dimension,
            "kernel_backend": kernels.BACKEND,
        }

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "documents": runtime.corpus.doc_count,
            "chunks": runtime.corpus.chunk_count,
            "prompt_checksums": dict(runtime.answer_engine.templates.checksums),
        }

    return app


def serve(runtime: Runtime, host: str | None = None, port: int | None = None) -> None:
    """Run the API under uvicorn until interrupted."""
    import uvicorn

    uvicorn.run(
        create_app(runtime),
        host=host or runtime.config.service.host,
        port=port or runtime.config.service.port,
        log_level="info",
    )
