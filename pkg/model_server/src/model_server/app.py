"""FastAPI application implementing the backend wire protocol.

Endpoints mirror what the tweetact client expects, byte for byte:
``POST /classify`` -> {"classes", "probabilities"}, ``POST /fill-mask`` ->
{"candidates"}, ``GET /health`` -> {"status", "model", "classes"}.
Malformed bodies get 400, oversized batches 413.
"""

from __future__ import annotations

from typing import List, Sequence

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .models import UnsupportedTask

DEFAULT_MAX_BATCH = 64


class ClassifyRequest(BaseModel):
    texts: List[str]


class FillMaskRequest(BaseModel):
    tokens: List[str]
    position: int
    top_k: int = 5


def create_app(model, classes: Sequence[str], task: str, max_batch: int = DEFAULT_MAX_BATCH) -> FastAPI:
    """Wire one served model into a fresh application instance."""
    if task not in ("classify", "fill-mask"):
        raise ValueError(f"task must be classify or fill-mask, got {task!r}")
    if max_batch < 1:
        raise ValueError("max_batch must be at least 1")
    class_list = list(classes)
    app = FastAPI(title="model-server-shim")
    # Handlers are async with no awaits: they run serially on the event
    # loop, giving the single-worker request queue this service promises.

    # The wire protocol promises 400 for malformed bodies; FastAPI's
    # default validation status is 422, so remap it.
    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.exception_handler(UnsupportedTask)
    async def _unsupported(request: Request, exc: UnsupportedTask):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/health")
    async def health():
        return {"status": "ok", "model": model.name, "classes": class_list}

    @app.post("/classify")
    async def classify(request: ClassifyRequest):
        if task != "classify":
            raise HTTPException(status_code=400, detail=f"server task is {task!r}")
        if len(request.texts) > max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.texts)} exceeds max_batch {max_batch}",
            )
        rows = model.classify(request.texts, class_list)
        return {"classes": class_list, "probabilities": rows}

    @app.post("/fill-mask")
    async def fill_mask(request: FillMaskRequest):
        if task != "fill-mask":
            raise HTTPException(status_code=400, detail=f"server task is {task!r}")
        if not 0 <= request.position <= len(request.tokens):
            raise HTTPException(
                status_code=400,
                detail=f"position {request.position} out of range 0..{len(request.tokens)}",
            )
        if request.top_k < 1:
            raise HTTPException(status_code=400, detail="top_k must be at least 1")
        candidates = model.fill_mask(request.tokens, request.position, request.top_k)
        return {"candidates": candidates}

    return app
