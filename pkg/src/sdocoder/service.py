"""HTTP facade over the search index, the rules and the decision engine.

All successful responses are rendered through :func:`canonical_json`, so a
body here is byte-identical to the same payload printed by the CLI. Domain
errors map onto stable status codes with a ``{"error", "message"}`` body.

Sessions live in process memory. A session idle for longer than the
configured TTL behaves exactly like a cancelled one. When a journal path is
configured every session event is appended as one JSON line and replayed on
startup, which restores the same session states deterministically.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Request, Response
from pydantic import BaseModel, Field

from . import serialize
from .engine import DecisionEngine, SessionState, SessionStatus, canonical_json
from .errors import CodingSupportError, NotFound
from .fixture import packaged_manifest
from .index import SearchIndex
from .ingestion import Bundle, load_bundle
from .model import parse_section
from .tree import NodeKind

log = logging.getLogger("sdocoder.service")

HTTP_STATUS_BY_ERROR = {
    "EmptyQuery": 400,
    "EmptyConditionList": 400,
    "UnknownCode": 400,
    "UnclassifiedProcedure": 400,
    "InvalidAnswer": 400,
    "NotFound": 404,
    "StaleNode": 409,
    "SessionFinished": 410,
}


class SessionCreate(BaseModel):
    pc: list[str]
    pi: list[str] = Field(default_factory=list)
    session_id: str | None = None


class AnswerBody(BaseModel):
    state: int
    answer: str | list[str]


class _Stored:
    __slots__ = ("state", "lock", "touched")

    def __init__(self, state: SessionState):
        self.state = state
        self.lock = threading.Lock()
        self.touched = time.monotonic()


class SessionStore:
    """In-memory session table with lazy TTL expiry."""

    def __init__(self, ttl: float):
        self.ttl = ttl
        self._table: dict[str, _Stored] = {}
        self._lock = threading.Lock()

    def put(self, state: SessionState) -> _Stored:
        stored = _Stored(state)
        with self._lock:
            self._table[state.session_id] = stored
        return stored

    def get(self, session_id: str) -> _Stored:
        with self._lock:
            stored = self._table.get(session_id)
        if stored is None:
            raise NotFound(f"session {session_id} does not exist")
        if (
            time.monotonic() - stored.touched > self.ttl
            and stored.state.status is SessionStatus.AWAITING_ANSWER
        ):
            stored.state.status = SessionStatus.CANCELLED
        return stored

    def touch(self, stored: _Stored) -> None:
        stored.touched = time.monotonic()


class Journal:
    """Append-only JSONL record of every session event."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, event: dict) -> None:
        line = canonical_json(event) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line)

    def events(self) -> list[dict]:
        if not self.path.is_file():
            return []
        out = []
        with open(self.path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out


def replay_journal(engine: DecisionEngine, events: list[dict]) -> dict[str, SessionState]:
    """Rebuild session states by replaying journal events in order."""
    sessions: dict[str, SessionState] = {}
    for event in events:
        kind = event["event"]
        if kind == "start":
            state, _ = engine.start_session(
                event["pc"], event["pi"], session_id=event["session_id"]
            )
            sessions[state.session_id] = state
        elif kind == "answer":
            state = sessions[event["session_id"]]
            node = engine.tree.nodes[event["state"]]
            value = event["answer"]
            if node.kind in (NodeKind.ASK_BINARY, NodeKind.ASK_SINGLE_CODE):
                value = value[0]
            engine.answer(state, event["state"], value)
        elif kind == "cancel":
            engine.cancel(sessions[event["session_id"]])
        else:
            raise ValueError(f"unknown journal event {kind!r}")
    return sessions


def create_app(
    manifest: str | Path | None = None,
    *,
    bundle: Bundle | None = None,
    session_ttl: float = 86400.0,
    journal: str | Path | None = None,
) -> FastAPI:
    """Build the application around one loaded bundle.

    ``bundle`` wins over ``manifest``; with neither, the packaged
    demonstration corpus is served. Starting a session with an explicit id
    that already exists replaces that session.
    """
    if bundle is None:
        bundle = load_bundle(manifest if manifest is not None else packaged_manifest())
    if bundle.tree is None:
        raise ValueError("the manifest lists no decision tree; sessions need one")
    kb = bundle.kb
    index = SearchIndex(kb)
    engine = DecisionEngine(kb, bundle.tree, bundle.procedure_sets)
    store = SessionStore(ttl=session_ttl)
    journal_writer = Journal(journal) if journal is not None else None

    app = FastAPI(
        title="coding support service",
        version="1.0",
        openapi_url="/v1/openapi.json",
        docs_url="/v1/docs",
        redoc_url=None,
    )

    if journal_writer is not None:
        for state in replay_journal(engine, journal_writer.events()).values():
            store.put(state)

    def respond(payload, status_code: int = 200) -> Response:
        return Response(
            content=canonical_json(payload),
            status_code=status_code,
            media_type="application/json",
        )

    @app.exception_handler(CodingSupportError)
    async def domain_error(request: Request, exc: CodingSupportError) -> Response:
        status = HTTP_STATUS_BY_ERROR.get(exc.code, 500)
        return respond({"error": exc.code, "message": exc.message}, status_code=status)

    @app.middleware("http")
    async def access_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        log.info(
            "%s %s -> %d (%.1f ms)",
            request.method,
            request.url.path,
            response.status_code,
            (time.monotonic() - started) * 1000,
        )
        return response

    @app.get("/v1/{section}/autocomplete")
    def autocomplete(section: str, q: str = "", limit: int = 50) -> Response:
        target = parse_section(section)
        return respond(serialize.autocomplete_payload(index, target, q, limit=limit))

    @app.get("/v1/{section}/search")
    def search(section: str, q: str = "", limit: int = 50) -> Response:
        target = parse_section(section)
        return respond(serialize.search_payload(kb, index, target, q, limit=limit))

    @app.get("/v1/{section}/codes/{code}")
    def code_details(section: str, code: str, selected: str = "") -> Response:
        target = parse_section(section)
        chosen = [item for item in selected.split(",") if item]
        return respond(serialize.code_details_payload(kb, target, code, selected=chosen))

    @app.post("/v1/sessions")
    def start_session(body: SessionCreate) -> Response:
        state, interaction = engine.start_session(
            body.pc, body.pi, session_id=body.session_id
        )
        store.put(state)
        if journal_writer is not None:
            journal_writer.append(
                {
                    "event": "start",
                    "session_id": state.session_id,
                    "pc": list(state.pc),
                    "pi": list(state.pi),
                }
            )
        payload = serialize.session_payload(state, interaction, engine.progress(state))
        return respond(payload, status_code=201)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> Response:
        stored = store.get(session_id)
        with stored.lock:
            interaction = engine.interaction(stored.state)
            payload = serialize.session_payload(
                stored.state, interaction, engine.progress(stored.state)
            )
        return respond(payload)

    @app.post("/v1/sessions/{session_id}/answer")
    def answer(session_id: str, body: AnswerBody) -> Response:
        stored = store.get(session_id)
        with stored.lock:
            state, interaction = engine.answer(stored.state, body.state, body.answer)
            store.touch(stored)
            if journal_writer is not None:
                journal_writer.append(
                    {
                        "event": "answer",
                        "session_id": state.session_id,
                        "state": body.state,
                        "answer": list(state.history[-1].answer),
                    }
                )
            payload = serialize.session_payload(state, interaction, engine.progress(state))
        return respond(payload)

    @app.delete("/v1/sessions/{session_id}")
    def cancel(session_id: str) -> Response:
        stored = store.get(session_id)
        with stored.lock:
            engine.cancel(stored.state)
            if journal_writer is not None:
                journal_writer.append(
                    {"event": "cancel", "session_id": session_id}
                )
            payload = serialize.session_payload(stored.state, None, None)
        return respond(payload)

    app.state.kb = kb
    app.state.index = index
    app.state.engine = engine
    app.state.store = store
    return app
