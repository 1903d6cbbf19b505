"""HTTP service exposing a subject model over the apply/query/revert protocol.

Session rules: one edit session at a time, opened by POST /apply with a
fresh run token and closed by POST /revert with the same token.  Both
calls are idempotent for their own token; a second concurrent session,
a foreign revert, and reuse of a spent token are 409 conflicts.
Malformed requests are 400s.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .. import __version__
from ..batchfile import batch_from_dict
from ..harness.subject import SubjectModel
from .app import install_error_handlers


class ApplyRequest(BaseModel):
    run_token: str
    batch: dict


class RevertRequest(BaseModel):
    run_token: str


class QueryRequest(BaseModel):
    prompt: str


class SubjectSessionManager:
    """Serializes edit sessions over one underlying subject model."""

    def __init__(self, subject: SubjectModel) -> None:
        self._subject = subject
        self._lock = threading.Lock()
        self._active: str | None = None
        self._spent: set[str] = set()

    def apply(self, token: str, batch) -> str:
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
            self._subject.apply_batch(batch)
            self._active = token
            return "applied"

    def query(self, prompt: str) -> str:
        with self._lock:
            return self._subject.query(prompt)

    def revert(self, token: str) -> str:
        with self._lock:
            if self._active == token:
                self._subject.revert()
                self._active = None
                self._spent.add(token)
                return "reverted"
            if token in self._spent and self._active is None:
                return "already-reverted"
            if self._active is not None:
                raise HTTPException(
                    status_code=409,
                    detail=f"run {self._active!r} is active; token {token!r} cannot revert it",
                )
            raise HTTPException(status_code=409, detail=f"unknown run token {token!r}")


def create_subject_app(subject: SubjectModel) -> FastAPI:
    app = FastAPI(title="chainedit-subject", version=__version__)
    install_error_handlers(app)
    sessions = SubjectSessionManager(subject)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/apply")
    def apply(req: ApplyRequest) -> dict:
        batch = batch_from_dict(req.batch)
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
