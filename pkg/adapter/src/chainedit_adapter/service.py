"""HTTP edit service: POST /apply, /query, /revert over an editing backend.

Session rules match the subject protocol: one edit session at a time,
opened by /apply with a fresh run token and closed by /revert with the
same token.  Both calls are idempotent for their own token; a second
concurrent session, a foreign revert, and reuse of a spent token are
409 conflicts.  Malformed requests are 400s, and a backend failure
surfaces as a structured 500 without wedging the service.

A single lock serializes applies, reverts, and queries, so a query can
never observe a half-applied batch.
"""

from __future__ import annotations

import logging
import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .backend import EditingBackend, EditingFailure
from .config import AdapterConfig
from .wire import WireBatch, parse_batch

log = logging.getLogger("chainedit_adapter")


class ApplyRequest(BaseModel):
    run_token: str
    batch: dict


class QueryRequest(BaseModel):
    prompt: str


class RevertRequest(BaseModel):
    run_token: str


class EditSessionManager:
    """Serializes edit sessions over one editing backend."""

    def __init__(self, backend: EditingBackend) -> None:
        self._backend = backend
        self._lock = threading.Lock()
        self._active: str | None = None
        self._delta: object = None
        self._spent: set[str] = set()

    def apply(self, token: str, batch: WireBatch) -> str:
        if not token:
            raise HTTPException(status_code=400, detail="run_token must be non-empty")
        with self._lock:
            if self._active == token:
                return "already-applied"
            if self._active is not None:
                raise HTTPException(
                    status_code=409,
                    detail=f"run {self._active!r} is active; revert it first",
                )
            if token in self._spent:
                raise HTTPException(
                    status_code=409,
                    detail=f"run token {token!r} was already used and reverted",
                )
            self._delta = self._backend.apply_edits(batch.edits)
            self._active = token
            log.info(
                "applied batch: run=%s edits=%d (original %s/%s -> %s)",
                token,
                len(batch.edits),
                batch.original.subject,
                batch.original.relation,
                batch.original.object,
            )
            return "applied"

    def query(self, prompt: str) -> str:
        with self._lock:
            return self._backend.generate(prompt)

    def revert(self, token: str) -> str:
        with self._lock:
            if self._active == token:
                self._backend.revert(self._delta)
                self._active = None
                self._delta = None
                self._spent.add(token)
                log.info("reverted batch: run=%s", token)
                return "reverted"
            if token in self._spent and self._active is None:
                return "already-reverted"
            if self._active is not None:
                raise HTTPException(
                    status_code=409,
                    detail=f"run {self._active!r} is active; token {token!r} cannot revert it",
                )
            raise HTTPException(status_code=409, detail=f"unknown run token {token!r}")


def create_adapter_app(backend: EditingBackend, config: AdapterConfig | None = None) -> FastAPI:
    config = config or AdapterConfig()
    app = FastAPI(title="chainedit-adapter", version=__version__)
    sessions = EditSessionManager(backend)

    @app.exception_handler(ValueError)
    def _bad_value(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"error": type(exc).__name__, "message": str(exc)}},
        )

    @app.exception_handler(RequestValidationError)
    def _invalid_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"error": "invalid_request", "message": str(exc.errors())}},
        )

    @app.exception_handler(EditingFailure)
    def _backend_failure(request: Request, exc: EditingFailure) -> JSONResponse:
        log.error("editing backend failure: %s", exc)
        return JSONResponse(
            status_code=500,
            content={"detail": {"error": "EditingFailure", "message": str(exc)}},
        )

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "model": config.model,
            "method": config.method,
        }

    @app.post("/apply")
    def apply(req: ApplyRequest) -> dict:
        batch = parse_batch(req.batch)
        status = sessions.apply(req.run_token, batch)
        return {"status": status, "run_token": req.run_token}

    @app.post("/query")
    def query(req: QueryRequest) -> dict:
        return {"text": sessions.query(req.prompt)}

    @app.post("/revert")
    def revert(req: RevertRequest) -> dict:
        status = sessions.revert(req.run_token)
        return {"status": status, "run_token": req.run_token}

    return app
