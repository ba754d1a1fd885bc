"""Session state machine: staged generation, sampling and pruning, iterative
symbolic refinement, and user edits with downstream invalidation.

A session moves monotonically through the stage order below; the refine and
constraint stages self-loop.  Every user input, model output, and feedback
message lands in the session's append-only event log, and edits clear all
later-stage artifacts instead of trying to patch them.
"""

from __future__ import annotations

import io
import itertools
import json
import re
import uuid
import zipfile
from dataclasses import dataclass, field
from enum import Enum

from . import core, dsl, fol, retrieval, validator
from .diagnostics import Diagnostic, ValidationReport
from .llm import Backend, ChatMessage, Role, window_history
from .templates import TEMPLATES


class Stage(Enum):
    BASIC_INFO = "basic_info"
    TASK_DESCRIPTION = "task_description"
    CONCEPT_LIST = "concept_list"
    GRAPH_DRAFT = "graph_draft"
    GRAPH_REFINE = "graph_refine"
    GRAPH_APPROVAL = "graph_approval"
    CONSTRAINT_INPUT = "constraint_input"
    FOL_DRAFT = "fol_draft"
    CONSTRAINT_COMPILE = "constraint_compile"
    DONE = "done"


STAGE_ORDER = list(Stage)


def stage_index(stage: Stage) -> int:
    return STAGE_ORDER.index(stage)


GENERATIVE_STAGES = (Stage.TASK_DESCRIPTION, Stage.CONCEPT_LIST, Stage.GRAPH_DRAFT,
                     Stage.FOL_DRAFT)


@dataclass
class Config:
    samples: int = 3
    max_iterations: int = 5
    prune_threshold: int = 2
    retrieval_mode: str = "full"  # "full" (k=4) or "dynamic" (k=1)
    history_budget: int = 4000
    temperature: float = 0.2

    @property
    def retrieval_k(self) -> int:
        return 4 if self.retrieval_mode == "full" else 1


class PipelineError(Exception):
    pass


class InvalidInfo(PipelineError):
    pass


class StagePreconditionMissing(PipelineError):
    pass


class StaleEdit(PipelineError):
    pass


class InvalidEdit(PipelineError):
    pass


class MaxIterationsExceeded(PipelineError):
    def __init__(self, best: Candidate):
        super().__init__("refinement iteration cap reached; best candidate attached")
        self.best = best


@dataclass
class Candidate:
    """One sampled artifact with its validation report and lint findings."""

    text: str
    index: int
    report: ValidationReport | None = None
    lints: tuple[str, ...] = ()

    @property
    def score(self) -> int:
        return self.report.error_count if self.report is not None else 0

    @property
    def error_free(self) -> bool:
        return self.report is None or self.report.error_free


@dataclass(frozen=True)
class Edit:
    kind: str
    stage: Stage
    payload: dict = field(default_factory=dict)


@dataclass
class Session:
    id: str
    created_at: float
    basic_info: dict[str, str]
    stage: Stage = Stage.BASIC_INFO
    task_description: str | None = None
    concept_list: list[dict] = field(default_factory=list)
    candidates: dict[str, list[Candidate]] = field(default_factory=dict)
    selected: dict[str, int] = field(default_factory=dict)
    graph: core.ConceptGraph | None = None
    constraints: list[core.Constraint] = field(default_factory=list)
    fol_texts: list[str] = field(default_factory=list)
    history: list[ChatMessage] = field(default_factory=list)
    iteration_count: int = 0
    event_log: list[dict] = field(default_factory=list)
    version: int = 0
    pending_constraint: str | None = None

    def log(self, kind: str, stage: Stage, detail: dict | str) -> None:
        self.event_log.append({
            "seq": len(self.event_log),
            "kind": kind,
            "stage": stage.value,
            "detail": detail,
        })

    def selected_candidate(self, stage: Stage) -> Candidate | None:
        pool = self.candidates.get(stage.value, [])
        index = self.selected.get(stage.value)
        if index is None or not pool:
            return None
        return next((c for c in pool if c.index == index), None)

    def bump(self) -> None:
        self.version += 1


def parse_concept_list(text: str) -> tuple[list[dict], list[str]]:
    """Parse 'name | kind [| labels]' lines; returns (entries, lint findings)."""
    entries, lints = [], []
    for line in text.splitlines():
        line = line.strip().strip("-").strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) < 2 or parts[1] not in ("input", "decision"):
            lints.append(f"unparseable concept line: {line!r}")
            continue
        labels = [l.strip() for l in parts[2].split(",")] if len(parts) > 2 else []
        if any(re.fullmatch(r"etc\.?", l, flags=re.IGNORECASE) for l in labels):
            lints.append(f"non-enumerated label set on {parts[0]!r}: replace 'etc.' "
                         "with the actual labels")
            labels = [l for l in labels if not re.fullmatch(r"etc\.?", l, flags=re.IGNORECASE)]
        entries.append({
            "name": core.normalize_name(parts[0]),
            "kind": parts[1],
            "labels": labels,
        })
    return entries, lints


def format_concept_list(entries: list[dict]) -> str:
    lines = []
    for e in entries:
        suffix = f" | {', '.join(e['labels'])}" if e.get("labels") else ""
        lines.append(f"{e['name']} | {e['kind']}{suffix}")
    return "\n".join(lines)


def select_best(candidates: list[Candidate]) -> Candidate | None:
    """Minimize error count, ties broken by earliest sample index."""
    if not candidates:
        return None
    return min(candidates, key=lambda c: (c.score, c.index))


def prune(candidates: list[Candidate], iteration_count: int,
          threshold: int = 2) -> list[Candidate]:
    """Once any error-free candidate exists past the iteration threshold,
    only the error-free subset survives."""
    if iteration_count >= threshold and any(c.error_free for c in candidates):
        return [c for c in candidates if c.error_free]
    return list(candidates)


class Pipeline:
    """Drives sessions against a backend, a demo store, and a config."""

    def __init__(self, backend: Backend, store: retrieval.DemoStore | None = None,
                 config: Config | None = None, clock=None, id_factory=None):
        self.backend = backend
        self.store = store or retrieval.DemoStore()
        self.config = config or Config()
        self.clock = clock or (lambda: 0.0)
        self.id_factory = id_factory or (lambda: uuid.uuid4().hex)

    # -- session lifecycle ---------------------------------------------------

    def start_session(self, basic_info: dict[str, str]) -> Session:
        if not basic_info.get("task_name", "").strip():
            raise InvalidInfo("task name must be nonempty")
        session = Session(id=self.id_factory(), created_at=self.clock(),
                          basic_info=dict(basic_info))
        session.log("user", Stage.BASIC_INFO, basic_info)
        session.bump()
        return session

    # -- generation ------------------------------------------------------------

    def _retrieve(self, session: Session, stage: Stage) -> str:
        query_text = session.task_description or session.basic_info["task_name"]
        try:
            query = self.store.embed(query_text)
        except ValueError:
            return ""
        demos = self.store.top_k(query, self.config.retrieval_k, stage.value) \
            if self.store.entries else []
        if demos:
            session.log("demos", stage, [d.id for d in demos])
        return "\n\n".join(f"Task: {d.task_text}\n{d.payload}" for d in demos)

    def _bindings(self, session: Session, stage: Stage, demos: str) -> tuple[str, dict]:
        info = session.basic_info
        if stage is Stage.TASK_DESCRIPTION:
            return "task_description", {
                "task_name": info["task_name"],
                "domain": info.get("domain", ""),
                "dataset": info.get("dataset", ""),
                "demos": demos,
            }
        if stage is Stage.CONCEPT_LIST:
            return "concept_list", {
                "task_name": info["task_name"],
                "description": session.task_description or "",
                "demos": demos,
            }
        if stage is Stage.GRAPH_DRAFT:
            return "graph_draft", {
                "task_name": info["task_name"],
                "description": session.task_description or "",
                "concepts": format_concept_list(session.concept_list),
                "demos": demos,
            }
        if stage is Stage.FOL_DRAFT:
            assert session.graph is not None
            predicates = sorted(session.graph.concept_names() | session.graph.role_names())
            return "fol_draft", {
                "constraint_text": session.pending_constraint or "",
                "graph_source": dsl.emit_graph(session.graph),
                "predicates": ", ".join(predicates),
                "demos": demos,
            }
        raise StagePreconditionMissing(f"stage {stage.value} is not generative")

    def _check_preconditions(self, session: Session, stage: Stage) -> None:
        if stage_index(session.stage) > stage_index(stage) and stage is not Stage.FOL_DRAFT:
            raise StagePreconditionMissing(
                f"session already past {stage.value} (at {session.stage.value})")
        needs = {
            Stage.TASK_DESCRIPTION: lambda: True,
            Stage.CONCEPT_LIST: lambda: session.task_description is not None,
            Stage.GRAPH_DRAFT: lambda: bool(session.concept_list),
            Stage.FOL_DRAFT: lambda: session.graph is not None
                                     and session.pending_constraint is not None,
        }
        if stage not in needs or not needs[stage]():
            raise StagePreconditionMissing(f"prerequisites of {stage.value} missing")

    def _attach_report(self, session: Session, stage: Stage, text: str,
                       index: int) -> Candidate:
        if stage is Stage.GRAPH_DRAFT or stage is Stage.GRAPH_REFINE:
            result = dsl.parse_graph(text)
            diags = list(result.diagnostics)
            if result.graph is not None:
                diags.extend(validator.validate(result.graph).diagnostics)
            return Candidate(text, index, ValidationReport.from_list(diags))
        if stage in (Stage.FOL_DRAFT, Stage.CONSTRAINT_COMPILE):
            assert session.graph is not None
            ast, diags = fol.parse_fol(text)
            if ast is not None:
                _, compile_diags = fol.compile_fol(ast, session.graph, source_text=text)
                diags = diags + compile_diags
            return Candidate(text, index, ValidationReport.from_list(diags))
        if stage is Stage.CONCEPT_LIST:
            _, lints = parse_concept_list(text)
            return Candidate(text, index, None, tuple(lints))
        return Candidate(text, index)

    def generate_stage(self, session: Session, stage: Stage) -> list[Candidate]:
        self._check_preconditions(session, stage)
        demos = self._retrieve(session, stage)
        template_id, bindings = self._bindings(session, stage, demos)
        rendered = TEMPLATES[template_id].render(bindings)
        system = [m for m in rendered if m.role is Role.SYSTEM]
        new_turns = [m for m in rendered if m.role is not Role.SYSTEM]
        messages = window_history(system + session.history + new_turns,
                                  self.config.history_budget)
        responses = self.backend.complete(messages, n=self.config.samples,
                                          params={"temperature": self.config.temperature})
        session.history.extend(new_turns)
        candidates = []
        for i, text in enumerate(responses):
            candidate = self._attach_report(session, stage, text.strip(), i)
            candidates.append(candidate)
            session.log("model", stage, {"index": i, "errors": candidate.score})
        session.candidates[stage.value] = candidates
        best = select_best(candidates)
        if best is not None:
            session.selected[stage.value] = best.index
            session.history.append(ChatMessage(Role.ASSISTANT, best.text or "(empty)"))
            if stage is Stage.CONCEPT_LIST:
                # the list is user-editable as soon as it exists
                session.concept_list, _ = parse_concept_list(best.text)
        session.stage = stage
        session.iteration_count = 0
        session.bump()
        return candidates

    def prune_stage(self, session: Session, stage: Stage) -> list[Candidate]:
        pool = session.candidates.get(stage.value, [])
        survivors = prune(pool, session.iteration_count, self.config.prune_threshold)
        session.candidates[stage.value] = survivors
        if survivors and session.selected.get(stage.value) not in {c.index for c in survivors}:
            session.selected[stage.value] = select_best(survivors).index
        session.bump()
        return survivors

    # -- refinement --------------------------------------------------------------

    def refine(self, session: Session, candidate: Candidate) -> Candidate:
        if candidate.report is None or candidate.report.error_free:
            raise InvalidEdit("candidate has no errors to refine")
        if session.iteration_count >= self.config.max_iterations:
            pool = session.candidates.get(session.stage.value, [candidate])
            raise MaxIterationsExceeded(select_best(pool) or candidate)
        feedback = validator.render_feedback(candidate.report)
        session.log("feedback", session.stage, feedback)
        template_id = ("fol_refine"
                       if session.stage in (Stage.FOL_DRAFT, Stage.CONSTRAINT_COMPILE)
                       else "graph_refine")
        messages = TEMPLATES[template_id].render(
            {"candidate": candidate.text, "feedback": feedback})
        messages = window_history(
            [m for m in messages if m.role is Role.SYSTEM] + session.history
            + [m for m in messages if m.role is not Role.SYSTEM],
            self.config.history_budget)
        response = self.backend.complete(
            messages, n=1, params={"temperature": self.config.temperature})[0]
        stage = session.stage
        if stage is Stage.GRAPH_DRAFT:
            stage = session.stage = Stage.GRAPH_REFINE
        pool = session.candidates.setdefault(stage.value, [])
        index = max((c.index for c in itertools.chain(
            pool, session.candidates.get(Stage.GRAPH_DRAFT.value, []))), default=-1) + 1
        refined = self._attach_report(session, stage, response.strip(), index)
        pool.append(refined)
        session.iteration_count += 1
        session.log("model", stage, {"index": index, "errors": refined.score,
                                     "iteration": session.iteration_count})
        session.selected[stage.value] = select_best(pool).index
        session.bump()
        return refined

    def refine_loop(self, session: Session, candidate: Candidate) -> Candidate:
        """Refine until error-free; at the iteration cap, surface best-so-far."""
        current = candidate
        while not current.error_free:
            try:
                current = self.refine(session, current)
            except MaxIterationsExceeded as exc:
                return exc.best
        return current

    # -- user edits ------------------------------------------------------------

    def apply_user_edit(self, session: Session, edit: Edit) -> Session:
        if edit.stage is not session.stage:
            raise StaleEdit(f"edit targets {edit.stage.value}, session is at "
                            f"{session.stage.value}")
        handler = getattr(self, f"_edit_{edit.kind}", None)
        if handler is None:
            raise InvalidEdit(f"unknown edit kind {edit.kind!r}")
        handler(session, edit.payload)
        session.log("user", session.stage, {"edit": edit.kind, **edit.payload})
        session.bump()
        return session

    def _invalidate_downstream(self, session: Session, from_stage: Stage) -> None:
        cutoff = stage_index(from_stage)
        for stage in STAGE_ORDER:
            if stage_index(stage) > cutoff:
                session.candidates.pop(stage.value, None)
                session.selected.pop(stage.value, None)
        if cutoff < stage_index(Stage.GRAPH_APPROVAL):
            session.graph = None
        if cutoff < stage_index(Stage.CONSTRAINT_INPUT):
            session.constraints.clear()
            session.fol_texts.clear()

    def _edit_replace_description(self, session: Session, payload: dict) -> None:
        text = payload.get("text", "").strip()
        if not text:
            raise InvalidEdit("replacement description must be nonempty")
        session.task_description = text
        self._invalidate_downstream(session, Stage.TASK_DESCRIPTION)

    def _edit_remove_concept(self, session: Session, payload: dict) -> None:
        name = core.normalize_name(payload.get("name", ""))
        if session.stage is Stage.CONCEPT_LIST:
            before = len(session.concept_list)
            session.concept_list = [e for e in session.concept_list if e["name"] != name]
            if len(session.concept_list) == before:
                raise InvalidEdit(f"concept {name!r} is not in the list")
        elif session.graph is not None:
            if session.graph.find(name) is None:
                raise InvalidEdit(f"concept {name!r} is not declared")
            session.graph = core.ConceptGraph(
                session.graph.name,
                tuple(c for c in session.graph.concepts
                      if core.normalize_name(c.name) != name),
                tuple(e for e in session.graph.edges
                      if name not in [core.normalize_name(p) for p in e.endpoints()]),
                session.graph.constraints)
        else:
            raise InvalidEdit("no concept list or graph to edit")
        self._invalidate_downstream(session, session.stage)

    def _edit_add_concept(self, session: Session, payload: dict) -> None:
        name = core.normalize_name(payload.get("name", ""))
        if not name:
            raise InvalidEdit("concept name must be nonempty")
        if session.stage is Stage.CONCEPT_LIST:
            if any(e["name"] == name for e in session.concept_list):
                raise InvalidEdit(f"concept {name!r} already listed")
            session.concept_list.append({"name": name,
                                         "kind": payload.get("kind", "input"),
                                         "labels": payload.get("labels", [])})
        elif session.graph is not None:
            kind = (core.ConceptKind.DECISION if payload.get("kind") == "decision"
                    else core.ConceptKind.INPUT)
            labels = tuple(payload["labels"]) if payload.get("labels") else None
            try:
                session.graph = core.add_concept(session.graph,
                                                 core.Concept(name, kind, labels))
            except core.KgError as exc:
                raise InvalidEdit(str(exc)) from exc
        else:
            raise InvalidEdit("no concept list or graph to edit")
        self._invalidate_downstream(session, session.stage)

    def _edit_rename_concept(self, session: Session, payload: dict) -> None:
        old = core.normalize_name(payload.get("old", ""))
        new = core.normalize_name(payload.get("new", ""))
        if session.stage is Stage.CONCEPT_LIST:
            entry = next((e for e in session.concept_list if e["name"] == old), None)
            if entry is None:
                raise InvalidEdit(f"concept {old!r} is not in the list")
            entry["name"] = new
        else:
            raise InvalidEdit("rename is a concept-list edit")
        self._invalidate_downstream(session, session.stage)

    def _edit_add_edge(self, session: Session, payload: dict) -> None:
        if session.graph is None:
            raise InvalidEdit("no graph to edit")
        kind = core.EdgeKind(payload["kind"])
        try:
            if kind is core.EdgeKind.HAS_A:
                edge = core.Edge(kind, payload["source"],
                                 roles=tuple((r, t) for r, t in payload["roles"]))
            else:
                edge = core.Edge(kind, payload["source"], payload["target"])
            session.graph = core.add_edge(session.graph, edge)
        except (core.KgError, ValueError, KeyError) as exc:
            raise InvalidEdit(str(exc)) from exc
        self._invalidate_downstream(session, session.stage)

    def _edit_remove_edge(self, session: Session, payload: dict) -> None:
        if session.graph is None:
            raise InvalidEdit("no graph to edit")
        kind = core.EdgeKind(payload["kind"])
        source = core.normalize_name(payload["source"])
        remaining = []
        removed = False
        for e in session.graph.edges:
            matches = (not removed and e.kind is kind
                       and core.normalize_name(e.source) == source
                       and (kind is core.EdgeKind.HAS_A
                            or core.normalize_name(e.target or "")
                            == core.normalize_name(payload.get("target", ""))))
            if matches:
                removed = True
            else:
                remaining.append(e)
        if not removed:
            raise InvalidEdit("no matching edge to remove")
        session.graph = core.ConceptGraph(session.graph.name, session.graph.concepts,
                                          tuple(remaining), session.graph.constraints)
        self._invalidate_downstream(session, session.stage)

    def _edit_select_candidate(self, session: Session, payload: dict) -> None:
        index = payload.get("index")
        pool = session.candidates.get(session.stage.value, [])
        chosen = next((c for c in pool if c.index == index), None)
        if chosen is None:
            raise InvalidEdit(f"no candidate with index {index}")
        session.selected[session.stage.value] = index
        if session.stage is Stage.CONCEPT_LIST:
            session.concept_list, _ = parse_concept_list(chosen.text)

    def _edit_replace_constraint(self, session: Session, payload: dict) -> None:
        session.pending_constraint = payload.get("text", "").strip() or None

    def _edit_approve(self, session: Session, payload: dict) -> None:
        self._advance(session)

    def _advance(self, session: Session) -> None:
        stage = session.stage
        if stage is Stage.BASIC_INFO:
            session.stage = Stage.TASK_DESCRIPTION
        elif stage is Stage.TASK_DESCRIPTION:
            chosen = session.selected_candidate(stage)
            if chosen is None and session.task_description is None:
                raise InvalidEdit("no description to approve")
            if chosen is not None:
                session.task_description = chosen.text
            session.stage = Stage.CONCEPT_LIST
        elif stage is Stage.CONCEPT_LIST:
            chosen = session.selected_candidate(stage)
            if chosen is not None and not session.concept_list:
                session.concept_list, _ = parse_concept_list(chosen.text)
            if not session.concept_list:
                raise InvalidEdit("no concept list to approve")
            session.stage = Stage.GRAPH_DRAFT
        elif stage in (Stage.GRAPH_DRAFT, Stage.GRAPH_REFINE):
            chosen = session.selected_candidate(stage) \
                or session.selected_candidate(Stage.GRAPH_DRAFT)
            if chosen is None or not chosen.error_free:
                raise InvalidEdit("selected graph candidate still has errors")
            session.graph = dsl.parse_graph(chosen.text).graph
            session.stage = Stage.GRAPH_APPROVAL
        elif stage is Stage.GRAPH_APPROVAL:
            if session.graph is None:
                raise InvalidEdit("no graph to approve")
            report = validator.validate(session.graph)
            if not report.error_free:
                raise InvalidEdit("graph still has validation errors")
            session.stage = Stage.CONSTRAINT_INPUT
        elif stage is Stage.CONSTRAINT_INPUT:
            session.stage = Stage.DONE
        elif stage in (Stage.FOL_DRAFT, Stage.CONSTRAINT_COMPILE):
            session.stage = Stage.CONSTRAINT_INPUT
        session.log("stage", session.stage, "advance")

    # -- constraint flow -----------------------------------------------------------

    def run_constraint_flow(self, session: Session, nl_constraint: str
                            ) -> tuple[list[Candidate], core.Constraint | None,
                                       list[Diagnostic]]:
        """NL constraint -> FOL samples -> grounded compile, with refinement."""
        if session.stage is not Stage.CONSTRAINT_INPUT or session.graph is None:
            raise StagePreconditionMissing("constraint flow needs an approved graph")
        nl_constraint = nl_constraint.strip()
        if not nl_constraint:
            return [], None, []
        session.pending_constraint = nl_constraint
        session.log("user", Stage.CONSTRAINT_INPUT, {"constraint": nl_constraint})
        candidates = self.generate_stage(session, Stage.FOL_DRAFT)
        best = select_best(candidates)
        assert best is not None
        if not best.error_free:
            best = self.refine_loop(session, best)
        ast, parse_diags = fol.parse_fol(best.text)
        if ast is None:
            session.stage = Stage.CONSTRAINT_INPUT
            session.bump()
            return candidates, None, parse_diags
        constraint, diags = fol.compile_fol(ast, session.graph, source_text=best.text)
        if constraint is not None:
            session.constraints.append(constraint)
            session.fol_texts.append(best.text)
            session.graph = core.ConceptGraph(
                session.graph.name, session.graph.concepts, session.graph.edges,
                session.graph.constraints + (constraint,))
        session.pending_constraint = None
        session.stage = Stage.CONSTRAINT_INPUT
        session.bump()
        return candidates, constraint, parse_diags + diags


# --- export ---------------------------------------------------------------------

def export_archive(session: Session) -> bytes:
    """Deterministic zip: final program, FOL sources, validation report, events."""
    program = dsl.emit_graph(session.graph) if session.graph is not None else ""
    report = validator.validate(session.graph) if session.graph is not None \
        else ValidationReport()
    fol_text = "".join(line + "\n" for line in session.fol_texts)
    events = "".join(json.dumps(e, sort_keys=True, ensure_ascii=False) + "\n"
                     for e in session.event_log)
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        for name, payload in (("program.dkg", program), ("constraints.fol", fol_text),
                              ("report.jsonl", report.to_jsonl()), ("events.jsonl", events)):
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            archive.writestr(info, payload)
    return buffer.getvalue()
