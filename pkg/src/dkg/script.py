"""Headless session scripts: run a full pipeline session from a JSON script,
either recording a transcript (scripted responses) or replaying one.

Script shape:

    {
      "session_id": "nli-demo",
      "basic_info": {"task_name": "...", "domain": "...", "dataset": "..."},
      "config": {"samples": 3},
      "responses": ["...", ...],          // record mode only, consumed in order
      "steps": [
        {"op": "generate", "stage": "task_description"},
        {"op": "approve"},
        {"op": "edit", "kind": "remove_concept", "payload": {"name": "etc"}},
        {"op": "refine_loop"},
        {"op": "constraint", "text": "..."},
        ...
      ]
    }
"""

from __future__ import annotations

import json
from pathlib import Path

from . import pipeline as pl
from . import retrieval
from .llm import Backend, ReplayBackend, ScriptedBackend, Transcript


def load_script(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _run(script: dict, backend: Backend,
         store: retrieval.DemoStore | None = None) -> pl.Session:
    config = pl.Config(**script.get("config", {}))
    pipe = pl.Pipeline(backend, store=store, config=config,
                       clock=lambda: 0.0,
                       id_factory=lambda: script.get("session_id", "session"))
    session = pipe.start_session(script["basic_info"])
    for step in script.get("steps", []):
        op = step["op"]
        if op == "generate":
            pipe.generate_stage(session, pl.Stage(step["stage"]))
        elif op == "approve":
            pipe.apply_user_edit(session, pl.Edit("approve", session.stage, {}))
        elif op == "edit":
            pipe.apply_user_edit(session, pl.Edit(step["kind"], session.stage,
                                                  step.get("payload", {})))
        elif op == "select":
            pipe.apply_user_edit(session, pl.Edit("select_candidate", session.stage,
                                                  {"index": step["index"]}))
        elif op == "prune":
            pipe.prune_stage(session, session.stage)
        elif op == "refine_loop":
            chosen = session.selected_candidate(session.stage)
            if chosen is not None and not chosen.error_free:
                pipe.refine_loop(session, chosen)
        elif op == "constraint":
            pipe.run_constraint_flow(session, step["text"])
        else:
            raise ValueError(f"unknown script op {op!r}")
    return session


def record_session(script: dict, store: retrieval.DemoStore | None = None
                   ) -> tuple[pl.Session, Transcript]:
    """Run the script against its embedded responses, recording a transcript."""
    backend = ScriptedBackend(script.get("responses", []))
    session = _run(script, backend, store)
    return session, backend.transcript


def replay_session(script: dict, transcript: Transcript,
                   store: retrieval.DemoStore | None = None) -> pl.Session:
    """Re-run the script purely from a recorded transcript; deterministic."""
    return _run(script, ReplayBackend(transcript), store)
