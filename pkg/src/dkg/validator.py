"""Semantic validation of concept graphs and their constraints.

The rule catalogue (SEM001..SEM013) covers every structural requirement of
the graph model: endpoint resolution, decision-concept anchoring, relation
acyclicity, role sanity, constraint grounding, satisfiable cardinality
bounds, plus advisory warnings for likely modeling mistakes.
"""

from __future__ import annotations

from enum import Enum

from . import core, fol
from .diagnostics import ALL_CODES, Diagnostic, ValidationReport, error, warning


def validate(graph: core.ConceptGraph) -> ValidationReport:
    """Run the full semantic rule catalogue; total, deterministic, idempotent."""
    diags: list[Diagnostic] = []
    declared = graph.concept_names()

    # SEM001: unresolved edge endpoints
    for e in graph.edges:
        for endpoint in e.endpoints():
            if core.normalize_name(endpoint) not in declared:
                diags.append(error(
                    "SEM001", e.span,
                    f"edge references unknown concept {endpoint!r}",
                    f"declare concept {endpoint!r} before referencing it"))

    # SEM003 / SEM004: relation cycles
    for kind, code in ((core.EdgeKind.IS_A, "SEM003"), (core.EdgeKind.CONTAINS, "SEM004")):
        cycle = core.find_cycle(graph, kind)
        if cycle:
            culprit = next((e for e in graph.edges
                            if e.kind is kind and core.normalize_name(e.source) == cycle[0]),
                           None)
            span = culprit.span if culprit else core.POINT
            diags.append(error(
                code, span,
                f"{kind.value} cycle: {' -> '.join(cycle)}",
                f"remove one {kind.value} edge to break the cycle"))

    # SEM005: duplicated has_a role names (role count < 2 is rejected upstream)
    for e in graph.edges:
        if e.kind is core.EdgeKind.HAS_A:
            names = [core.normalize_name(r) for r, _ in e.roles]
            dupes = sorted({n for n in names if names.count(n) > 1})
            if dupes:
                diags.append(error(
                    "SEM005", e.span,
                    f"has_a on {e.source!r} duplicates role name(s) {', '.join(dupes)}",
                    "give every role a distinct name"))

    # SEM002 / SEM013: decision anchoring (skipped under is_a cycles, where
    # ancestry is ill-defined and already reported)
    if core.find_cycle(graph, core.EdgeKind.IS_A) is None:
        for c in graph.concepts:
            if c.kind is not core.ConceptKind.DECISION:
                continue
            anchor, depth = core.find_anchor(graph, c.name)
            if anchor is None:
                diags.append(error(
                    "SEM002", c.span,
                    f"decision concept {c.name!r} has no anchor",
                    f"link {c.name!r} to an input concept with an is_a edge"))
            elif depth > 2:
                diags.append(warning(
                    "SEM013", c.span,
                    f"decision concept {c.name!r} anchors to {anchor!r} through {depth} is_a steps",
                    "consider anchoring the decision concept closer to its input"))

    # constraint grounding: SEM001 / SEM006 / SEM007 via the shared checker,
    # SEM008 / SEM009 here
    for constraint in graph.constraints:
        diags.extend(fol.ground_check(constraint.node, graph))
        diags.extend(_check_cardinality(constraint.node, graph))

    # SEM010: component with no input concept (dangling modeling fragment)
    diags.extend(_check_reachability(graph))

    # SEM011: duplicate edges
    seen: dict[tuple, core.Edge] = {}
    for e in graph.edges:
        d = e.descriptor()
        if d in seen:
            diags.append(warning(
                "SEM011", e.span,
                f"duplicate edge: {e.describe()}",
                "remove the repeated edge declaration"))
        else:
            seen[d] = e

    return ValidationReport.from_list(diags)


def _check_cardinality(node: core.CNode, graph: core.ConceptGraph) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for n in core.walk(node):
        if isinstance(n, (core.ExactlyK, core.AtLeastK)) and n.k > len(n.children):
            kind = "exactly" if isinstance(n, core.ExactlyK) else "at_least"
            diags.append(error(
                "SEM008", n.span,
                f"{kind} bound {n.k} exceeds its {len(n.children)} operand(s)",
                "lower the bound or add operands"))
        if isinstance(n, core.ExactlyK) and n.k == 1 and len(n.children) >= 2:
            anchors = set()
            grounded = True
            for child in n.children:
                if isinstance(child, core.Predicate) and graph.find(child.name) is not None:
                    anchors.add(core.anchor_of(graph, child.name))
                else:
                    grounded = False
            if grounded and len(anchors) > 1:
                diags.append(warning(
                    "SEM009", n.span,
                    "mutually exclusive concepts do not share an anchor",
                    "make the alternatives decisions over the same input concept"))
    return diags


def _check_reachability(graph: core.ConceptGraph) -> list[Diagnostic]:
    """Warn for every concept in an undirected component with no input concept."""
    parent: dict[str, str] = {core.normalize_name(c.name): core.normalize_name(c.name)
                              for c in graph.concepts}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        if a in parent and b in parent:
            parent[find(a)] = find(b)

    for e in graph.edges:
        endpoints = [core.normalize_name(p) for p in e.endpoints()]
        for other in endpoints[1:]:
            union(endpoints[0], other)

    grounded_roots = {find(core.normalize_name(c.name)) for c in graph.concepts
                      if c.kind is core.ConceptKind.INPUT}
    diags = []
    for c in graph.concepts:
        if find(core.normalize_name(c.name)) not in grounded_roots:
            diags.append(warning(
                "SEM010", c.span,
                f"concept {c.name!r} is not connected to any input concept",
                f"connect {c.name!r} to the task's input structure or remove it"))
    return diags


class Classification(Enum):
    """Failure-channel classification: host-execution-style (syntax) versus
    symbolic-parser findings."""

    EXEC = "exec"
    SYMBOLIC = "symbolic"


class UnknownCode(Exception):
    def __init__(self, code: str):
        super().__init__(f"diagnostic code {code!r} is not in the catalogue")
        self.code = code


def classify(diagnostic: Diagnostic | str) -> Classification:
    code = diagnostic if isinstance(diagnostic, str) else diagnostic.code
    if code not in ALL_CODES:
        raise UnknownCode(code)
    return Classification.EXEC if code.startswith("SYN") else Classification.SYMBOLIC


def render_feedback(report: ValidationReport, limit: int = 10) -> str:
    """Numbered, deterministic feedback text for the refinement loop.

    Errors come before warnings; within each severity, diagnostics keep the
    report's (span, code) order.  Output is truncated to `limit` lines with a
    trailing "+N more" marker.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    ordered = ([d for d in report.diagnostics if d.is_error]
               + [d for d in report.diagnostics if not d.is_error])
    if not ordered:
        return "No errors found."
    lines = [f"{i}. {d}" for i, d in enumerate(ordered[:limit], start=1)]
    if len(ordered) > limit:
        lines.append(f"... +{len(ordered) - limit} more")
    return "\n".join(lines)
