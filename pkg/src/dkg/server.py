"""HTTP session API over the pipeline, for the browser UI and scripted clients.

Single-writer per session (a lock serializes actions), optimistic versioning
for edits, and a server-sent-event stream of generation phases.  Sessions are
persisted as append-only event logs under a data directory.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from . import dsl, fol, pipeline as pl, validator, viz
from .llm import BackendError, ReplayMiss


@dataclass
class SessionEntry:
    session: pl.Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    phases: list[dict] = field(default_factory=list)


class SessionStore:
    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.entries: dict[str, SessionEntry] = {}

    def add(self, session: pl.Session) -> SessionEntry:
        entry = SessionEntry(session)
        self.entries[session.id] = entry
        return entry

    def get(self, session_id: str) -> SessionEntry | None:
        return self.entries.get(session_id)

    def persist(self, session: pl.Session) -> None:
        if self.data_dir is None:
            return
        self.data_dir.mkdir(parents=True, exist_ok=True)
        path = self.data_dir / f"{session.id}.events.jsonl"
        path.write_text(
            "".join(json.dumps(e, sort_keys=True) + "\n" for e in session.event_log),
            encoding="utf-8")


def _envelope(data, version: int) -> dict:
    return {"ok": True, "data": data, "sessionVersion": version}


def _error(status: int, code: str, message: str, version: int = 0) -> JSONResponse:
    return JSONResponse(
        {"ok": False, "error": {"code": code, "message": message},
         "sessionVersion": version},
        status_code=status)


def _candidate_view(c: pl.Candidate, selected: bool) -> dict:
    view = {
        "index": c.index,
        "text": c.text,
        "selected": selected,
        "lints": list(c.lints),
        "errors": c.report.error_count if c.report else 0,
        "warnings": c.report.warning_count if c.report else 0,
        "diagnostics": [d.to_record() for d in c.report.diagnostics] if c.report else [],
    }
    if c.report is not None:
        view["feedback"] = validator.render_feedback(c.report)
    return view


def session_view(session: pl.Session) -> dict:
    stage_key = session.stage.value
    pool = session.candidates.get(stage_key, [])
    selected = session.selected.get(stage_key)
    graph = session.graph
    if graph is None:
        chosen = session.selected_candidate(pl.Stage.GRAPH_DRAFT) \
            or session.selected_candidate(pl.Stage.GRAPH_REFINE)
        if chosen is not None and chosen.error_free:
            graph = dsl.parse_graph(chosen.text).graph
    return {
        "id": session.id,
        "stage": stage_key,
        "version": session.version,
        "basicInfo": session.basic_info,
        "taskDescription": session.task_description,
        "conceptList": session.concept_list,
        "candidates": [_candidate_view(c, c.index == selected) for c in pool],
        "folTexts": session.fol_texts,
        "constraints": [fol.emit_constraint(c) for c in session.constraints],
        "layout": json.loads(viz.to_layout(graph).to_json()) if graph else None,
        "iterationCount": session.iteration_count,
    }


def create_app(pipe: pl.Pipeline, data_dir: str | Path | None = None,
               token: str | None = None) -> FastAPI:
    app = FastAPI(title="dkg session API")
    store = SessionStore(data_dir)
    app.state.store = store
    token = token if token is not None else os.environ.get("DKG_TOKEN")

    def authorized(request: Request) -> bool:
        if not token:
            return True
        return request.headers.get("Authorization") == f"Bearer {token}"

    def phase(entry: SessionEntry, stage: str, phase_name: str, detail: str = "") -> None:
        entry.phases.append({"stage": stage, "phase": phase_name, "detail": detail})

    @app.middleware("http")
    async def auth_middleware(request: Request, call_next):
        if not authorized(request):
            return _error(401, "Unauthorized", "missing or invalid bearer token")
        return await call_next(request)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BadRequest", "request body must be a JSON object")
        if not isinstance(body, dict):
            return _error(400, "BadRequest", "request body must be a JSON object")
        try:
            session = pipe.start_session({
                "task_name": str(body.get("task_name", "")),
                "domain": str(body.get("domain", "")),
                "dataset": str(body.get("dataset", "")),
            })
        except pl.InvalidInfo as exc:
            return _error(400, "InvalidInfo", str(exc))
        entry = store.add(session)
        phase(entry, session.stage.value, "started")
        store.persist(session)
        return _envelope({"id": session.id, "stage": session.stage.value},
                         session.version)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        entry = store.get(session_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown session {session_id}")
        return _envelope(session_view(entry.session), entry.session.version)

    @app.post("/sessions/{session_id}/actions")
    async def stage_action(session_id: str, request: Request):
        entry = store.get(session_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown session {session_id}")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BadRequest", "request body must be a JSON object")
        action = body.get("action")
        payload = body.get("payload") or {}
        expected = body.get("expected_version")
        with entry.lock:
            session = entry.session
            if expected is not None and expected != session.version:
                return _error(409, "VersionConflict",
                              f"expected version {expected}, session is at {session.version}",
                              session.version)
            try:
                _dispatch(pipe, entry, action, payload, phase)
            except (pl.StaleEdit, pl.InvalidEdit) as exc:
                return _error(422, type(exc).__name__, str(exc), session.version)
            except (pl.InvalidInfo, pl.StagePreconditionMissing, ValueError, KeyError) as exc:
                return _error(400, type(exc).__name__, str(exc), session.version)
            except pl.MaxIterationsExceeded as exc:
                return _error(422, "MaxIterationsExceeded", str(exc), session.version)
            except (BackendError, ReplayMiss) as exc:
                return _error(502, type(exc).__name__, str(exc), session.version)
            store.persist(session)
            return _envelope(session_view(session), session.version)

    @app.get("/sessions/{session_id}/layout")
    async def get_layout(session_id: str):
        entry = store.get(session_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown session {session_id}")
        view = session_view(entry.session)
        return _envelope(view["layout"], entry.session.version)

    @app.get("/sessions/{session_id}/export")
    async def get_export(session_id: str):
        entry = store.get(session_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown session {session_id}")
        payload = pl.export_archive(entry.session)
        return Response(payload, media_type="application/zip",
                        headers={"Content-Disposition":
                                 f'attachment; filename="{session_id}.zip"'})

    @app.get("/sessions/{session_id}/events")
    async def get_events(session_id: str):
        entry = store.get(session_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown session {session_id}")

        def stream():
            for event in list(entry.phases):
                yield f"event: phase\ndata: {json.dumps(event, sort_keys=True)}\n\n"
            snapshot = {"stage": entry.session.stage.value, "phase": "done",
                        "detail": "snapshot"}
            yield f"event: snapshot\ndata: {json.dumps(snapshot, sort_keys=True)}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def _dispatch(pipe: pl.Pipeline, entry: SessionEntry, action: str, payload: dict,
              phase) -> None:
    session = entry.session
    if action == "generate":
        stage = pl.Stage(payload["stage"])
        phase(entry, stage.value, "started")
        phase(entry, stage.value, "sampling")
        pipe.generate_stage(session, stage)
        phase(entry, stage.value, "validating")
        phase(entry, stage.value, "done")
    elif action == "refine":
        chosen = session.selected_candidate(session.stage)
        if chosen is None:
            raise pl.InvalidEdit("no selected candidate to refine")
        phase(entry, session.stage.value, "started")
        pipe.refine(session, chosen)
        phase(entry, session.stage.value, "done")
    elif action == "prune":
        pipe.prune_stage(session, session.stage)
    elif action == "select":
        pipe.apply_user_edit(session, pl.Edit("select_candidate", session.stage,
                                              {"index": payload.get("index")}))
    elif action == "edit":
        pipe.apply_user_edit(session, pl.Edit(payload.get("kind", ""), session.stage,
                                              payload.get("payload") or {}))
    elif action == "approve":
        pipe.apply_user_edit(session, pl.Edit("approve", session.stage, {}))
    elif action == "constraint":
        phase(entry, session.stage.value, "started")
        phase(entry, session.stage.value, "sampling")
        pipe.run_constraint_flow(session, payload.get("text", ""))
        phase(entry, session.stage.value, "validating")
        phase(entry, session.stage.value, "done")
    else:
        raise ValueError(f"unknown action {action!r}")
