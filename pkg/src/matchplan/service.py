"""HTTP/JSON service hosting live scheduling sessions for the web UI.

Sessions persist in an append-only JSONL event log; a restart replays the log
through the engines, which doubles as an integrity check.  Online sessions
answer absences round by round through the engine policy; pre-fixed sessions
are solved exactly at creation and served from the witness schedule.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from .engine import (
    RoundContext,
    SessionError,
    SessionState,
    make_engine,
    session_advance,
)
from .model import (
    AbsenceAssignment,
    BudgetMap,
    ModelError,
    Multigraph,
    Round,
    Schedule,
    Vertex,
)
from .solvers import chi_prime_c


class CreateSessionBody(BaseModel):
    graph: dict
    budgets: Optional[object] = None
    mode: str = "online"
    engine: Optional[str] = None
    absences: Optional[dict] = None


class PostRoundBody(BaseModel):
    absent: List[str] = []
    round: Optional[int] = None


class PrefixedEngine:
    """Serves rounds of the exact witness schedule computed at creation."""

    name = "prefixed-exact"

    def __init__(self, g: Multigraph, witness: Schedule):
        self.witness = witness
        self.g = g

    def respond(self, ctx: RoundContext, absent) -> List[int]:
        index = ctx.round_index
        if index > self.witness.num_rounds():
            return []
        matches = self.witness.rounds[index - 1].matches
        chosen: List[int] = []
        remaining = set(ctx.remaining)
        for pair in matches:
            for e in sorted(remaining):
                if self.g.edges[e] == pair and e not in chosen:
                    chosen.append(e)
                    remaining.discard(e)
                    break
        return chosen


class SessionRecord:
    def __init__(self, sid: str, state: SessionState, engine, mode: str,
                 absences: Optional[AbsenceAssignment], note: str):
        self.id = sid
        self.state = state
        self.engine = engine
        self.mode = mode
        self.absences = absences
        self.note = note
        self.created = time.time()
        self.updated = self.created
        self.lock = threading.Lock()
        self.round_results: List[dict] = []


class SessionStore:
    def __init__(self, data_dir: Optional[str]):
        self.sessions: Dict[str, SessionRecord] = {}
        self.lock = threading.Lock()
        self.log_path: Optional[Path] = None
        if data_dir is not None:
            root = Path(data_dir)
            root.mkdir(parents=True, exist_ok=True)
            self.log_path = root / "sessions.jsonl"
            if self.log_path.exists():
                self._replay()

    # -- persistence --

    def _append(self, event: dict) -> None:
        if self.log_path is None:
            return
        with open(self.log_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, separators=(",", ":")) + "\n")
            handle.flush()

    def _replay(self) -> None:
        with open(self.log_path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                kind = event["event"]
                if kind == "created":
                    record = _build_session(
                        event["graph"], event.get("budgets"), event["mode"],
                        event.get("engine"), event.get("absences"), sid=event["id"])
                    self.sessions[record.id] = record
                elif kind == "round":
                    record = self.sessions.get(event["id"])
                    if record is None:
                        continue
                    result = _play_round(record, event["absent"])
                    replayed = [[u, v] for u, v in result["matches"]]
                    if replayed != event["matches"]:
                        raise SessionError(
                            f"event log integrity failure for session {event['id']}: "
                            f"replayed {replayed}, logged {event['matches']}")
                elif kind == "deleted":
                    self.sessions.pop(event["id"], None)

    # -- operations --

    def create(self, body: CreateSessionBody) -> SessionRecord:
        record = _build_session(body.graph, body.budgets, body.mode,
                                body.engine, body.absences)
        with self.lock:
            self.sessions[record.id] = record
        self._append({
            "event": "created", "id": record.id, "graph": body.graph,
            "budgets": body.budgets, "mode": body.mode, "engine": body.engine,
            "absences": body.absences, "ts": record.created,
        })
        return record

    def get(self, sid: str) -> SessionRecord:
        record = self.sessions.get(sid)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return record

    def delete(self, sid: str) -> None:
        with self.lock:
            if sid not in self.sessions:
                raise HTTPException(status_code=404, detail="unknown session")
            del self.sessions[sid]
        self._append({"event": "deleted", "id": sid, "ts": time.time()})


def _build_session(graph_data: dict, budgets_data, mode: str,
                   engine_name: Optional[str], absences_data: Optional[dict],
                   sid: Optional[str] = None) -> SessionRecord:
    try:
        g, embedded = Multigraph.from_json_dict(graph_data)
    except ModelError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if g.num_edges() == 0:
        raise HTTPException(status_code=422, detail="edgeless tournament: nothing to schedule")
    try:
        if budgets_data is not None:
            budgets = BudgetMap.from_json_dict(g, budgets_data)
        elif embedded is not None:
            budgets = embedded
        else:
            budgets = BudgetMap.constant(g, 0)
    except ModelError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if mode not in ("online", "prefixed"):
        raise HTTPException(status_code=400, detail="mode must be 'online' or 'prefixed'")

    absences = None
    if mode == "prefixed":
        try:
            absences = AbsenceAssignment.from_json_dict(absences_data or {})
        except ModelError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        for v in absences.vertices():
            if not g.has_vertex(v):
                raise HTTPException(status_code=422, detail=f"unknown player {v!r} in absences")
        if not absences.is_t_labeling(budgets):
            raise HTTPException(status_code=409, detail="absences exceed the budgets")
        solved = chi_prime_c(g, absences)
        engine = PrefixedEngine(g, solved.witness)
        state = SessionState.create(g, budgets, mode, solved.value, engine.name)
        note = f"exact pre-fixed optimum {solved.value}"
        record = SessionRecord(sid or secrets.token_urlsafe(16), state, engine,
                               mode, absences, note)
        return record

    try:
        plan = make_engine(engine_name or "auto", g, budgets)
    except ModelError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    state = SessionState.create(g, budgets, mode, plan.limit, plan.name)
    return SessionRecord(sid or secrets.token_urlsafe(16), state, plan.engine,
                         mode, None, plan.note)


def _play_round(record: SessionRecord, absent: List[str]) -> dict:
    state = record.state
    index = state.rounds_played + 1
    if record.mode == "prefixed":
        expected = record.absences.absent_in_round(index)
        if absent and frozenset(absent) != expected:
            raise SessionError(
                f"round {index} absences are pre-fixed as {sorted(expected)}")
        absent_set = expected
    else:
        absent_set = frozenset(absent)
    new_state, pairs = session_advance(state, record.engine, absent_set)
    record.state = new_state
    record.updated = time.time()
    result = {
        "round": index,
        "absent": sorted(absent_set),
        "matches": [[u, v] for u, v in pairs],
        "budgets": {v: new_state.budgets.get(v) for v in new_state.graph.vertices},
        "finished": new_state.finished,
        "rounds_played": new_state.rounds_played,
    }
    if new_state.finished:
        result["timetable"] = new_state.schedule().timetable_rows(new_state.graph)
    record.round_results.append(result)
    return result


def _session_summary(record: SessionRecord) -> dict:
    state = record.state
    g = state.graph
    return {
        "id": record.id,
        "mode": record.mode,
        "engine": state.engine_name,
        "note": record.note,
        "limit": state.limit,
        "players": list(g.vertices),
        "budgets": {v: state.budgets.get(v) for v in g.vertices},
        "initial_budgets": {v: state.initial_budgets.get(v) for v in g.vertices},
        "round": state.rounds_played,
        "finished": state.finished,
        "remaining": [[u, v] for u, v in
                      (g.edges[e] for e in sorted(state.remaining))],
        "rounds": [{"absent": sorted(r.absent),
                    "matches": [[u, v] for u, v in r.matches]}
                   for r in state.transcript],
    }


def create_app(data_dir: Optional[str] = None,
               ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="matchplan scheduling service",
                  description="Live round-by-round tournament scheduling with "
                              "allowed absences.",
                  version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(data_dir)
    app.state.store = store
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(RequestValidationError)
    async def bad_payload(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        record = store.create(body)
        return _session_summary(record)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return _session_summary(store.get(sid))

    @app.post("/sessions/{sid}/rounds")
    def post_round(sid: str, body: PostRoundBody):
        record = store.get(sid)
        with record.lock:
            state = record.state
            next_index = state.rounds_played + 1
            if body.round is not None and body.round <= state.rounds_played:
                stored = record.round_results[body.round - 1]
                if stored["absent"] == sorted(set(body.absent)):
                    return stored
                raise HTTPException(status_code=409,
                                    detail={"message": "round already played",
                                            "winning_round": stored})
            if body.round is not None and body.round != next_index:
                raise HTTPException(status_code=409,
                                    detail={"message": f"next round is {next_index}"})
            for v in set(body.absent):
                if not state.graph.has_vertex(v):
                    raise HTTPException(status_code=422, detail=f"unknown player {v!r}")
            if state.finished:
                raise HTTPException(status_code=409, detail="session is finished")
            try:
                result = _play_round(record, list(set(body.absent)))
            except SessionError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except ModelError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        store._append({"event": "round", "id": sid, "index": result["round"],
                       "absent": result["absent"], "matches": result["matches"],
                       "ts": record.updated})
        return result

    @app.get("/sessions/{sid}/timetable")
    def get_timetable(sid: str, format: str = "json"):
        record = store.get(sid)
        schedule = record.state.schedule()
        if format == "csv":
            return PlainTextResponse(schedule.timetable_csv(record.state.graph),
                                     media_type="text/csv")
        return {"rows": schedule.timetable_rows(record.state.graph)}

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        store.delete(sid)
        return Response(status_code=204)

    @app.get("/spec")
    def openapi_spec():
        return app.openapi()

    return app
