"""In-memory model of concept graphs and logical-constraint ASTs.

All values are immutable: the graph-building operations return new graphs and
never touch their inputs, so graphs can be shared freely across threads and
pipeline stages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

from .spans import POINT, SourceSpan

_SEPARATORS = re.compile(r"[\s\-]+")


def normalize_name(name: str) -> str:
    """Canonical concept-name form: lowercase, separators collapsed to ``_``."""
    name = _SEPARATORS.sub("_", name.strip().lower())
    return re.sub(r"_+", "_", name)


class KgError(Exception):
    """Base class for graph-construction errors."""


class DuplicateConcept(KgError):
    def __init__(self, name: str):
        super().__init__(f"concept {name!r} is already declared")
        self.name = name


class UnknownConcept(KgError):
    def __init__(self, name: str):
        super().__init__(f"concept {name!r} is not declared")
        self.name = name


class ConceptKind(Enum):
    INPUT = "input"
    DECISION = "decision"


class EdgeKind(Enum):
    IS_A = "is_a"
    CONTAINS = "contains"
    HAS_A = "has_a"


@dataclass(frozen=True)
class Concept:
    """A node in the graph: an input structure or a decision (label) concept."""

    name: str
    kind: ConceptKind = ConceptKind.INPUT
    label_set: tuple[str, ...] | None = None
    doc: str | None = field(default=None, compare=False)
    span: SourceSpan = field(default=POINT, compare=False)

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("concept name must be nonempty")
        if self.label_set is not None:
            if len(set(self.label_set)) < 2:
                raise ValueError(f"label set of {self.name!r} needs >= 2 distinct entries")
            if self.kind is not ConceptKind.DECISION:
                raise ValueError(f"label set on non-decision concept {self.name!r}")


@dataclass(frozen=True)
class Edge:
    """A typed relation: is_a / contains (one target) or has_a (named roles)."""

    kind: EdgeKind
    source: str
    target: str | None = None
    roles: tuple[tuple[str, str], ...] = ()
    span: SourceSpan = field(default=POINT, compare=False)

    def __post_init__(self) -> None:
        if self.kind is EdgeKind.HAS_A:
            if self.target is not None or len(self.roles) < 2:
                raise ValueError("has_a edge needs >= 2 roles and no direct target")
        elif self.target is None or self.roles:
            raise ValueError(f"{self.kind.value} edge needs exactly one source and one target")

    def endpoints(self) -> tuple[str, ...]:
        if self.kind is EdgeKind.HAS_A:
            return (self.source, *(t for _, t in self.roles))
        return (self.source, self.target)  # type: ignore[return-value]

    def descriptor(self) -> tuple:
        """Normalized identity used by graph_diff and duplicate detection."""
        if self.kind is EdgeKind.HAS_A:
            roles = tuple((normalize_name(r), normalize_name(t)) for r, t in self.roles)
            return (self.kind.value, normalize_name(self.source), roles)
        return (self.kind.value, normalize_name(self.source), normalize_name(self.target))

    def describe(self) -> str:
        if self.kind is EdgeKind.HAS_A:
            inner = ", ".join(f"{r}: {t}" for r, t in self.roles)
            return f"{self.source} has_a({inner})"
        return f"{self.source} {self.kind.value} {self.target}"


# --- constraint AST -------------------------------------------------------

@dataclass(frozen=True)
class CNode:
    span: SourceSpan = field(default=POINT, compare=False, kw_only=True)


@dataclass(frozen=True)
class Predicate(CNode):
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Not(CNode):
    child: CNode


@dataclass(frozen=True)
class And(CNode):
    children: tuple[CNode, ...]


@dataclass(frozen=True)
class Or(CNode):
    children: tuple[CNode, ...]


@dataclass(frozen=True)
class Implies(CNode):
    lhs: CNode
    rhs: CNode


@dataclass(frozen=True)
class Iff(CNode):
    lhs: CNode
    rhs: CNode


@dataclass(frozen=True)
class ForAll(CNode):
    var: str
    domain: str
    body: CNode


@dataclass(frozen=True)
class Exists(CNode):
    var: str
    domain: str
    body: CNode


@dataclass(frozen=True)
class ExactlyK(CNode):
    k: int
    children: tuple[CNode, ...]


@dataclass(frozen=True)
class AtMostK(CNode):
    k: int
    children: tuple[CNode, ...]


@dataclass(frozen=True)
class AtLeastK(CNode):
    k: int
    children: tuple[CNode, ...]


@dataclass(frozen=True)
class Constraint:
    """A compiled constraint: AST root plus the original surface text."""

    node: CNode
    source_text: str | None = field(default=None, compare=False)


def walk(node: CNode):
    """Yield node and all descendants, pre-order."""
    yield node
    for f in ("child", "lhs", "rhs", "body"):
        sub = getattr(node, f, None)
        if isinstance(sub, CNode):
            yield from walk(sub)
    for sub in getattr(node, "children", ()):
        yield from walk(sub)


# --- concept graph --------------------------------------------------------

@dataclass(frozen=True)
class ConceptGraph:
    name: str
    concepts: tuple[Concept, ...] = ()
    edges: tuple[Edge, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    def concept_names(self) -> set[str]:
        return {normalize_name(c.name) for c in self.concepts}

    def find(self, name: str) -> Concept | None:
        wanted = normalize_name(name)
        for c in self.concepts:
            if normalize_name(c.name) == wanted:
                return c
        return None

    def role_names(self) -> set[str]:
        return {
            normalize_name(r)
            for e in self.edges
            if e.kind is EdgeKind.HAS_A
            for r, _ in e.roles
        }


def add_concept(graph: ConceptGraph, concept: Concept) -> ConceptGraph:
    if normalize_name(concept.name) in graph.concept_names():
        raise DuplicateConcept(concept.name)
    return replace(graph, concepts=graph.concepts + (concept,))


def add_edge(graph: ConceptGraph, edge: Edge) -> ConceptGraph:
    declared = graph.concept_names()
    for endpoint in edge.endpoints():
        if normalize_name(endpoint) not in declared:
            raise UnknownConcept(endpoint)
    return replace(graph, edges=graph.edges + (edge,))


def is_a_parents(graph: ConceptGraph, name: str) -> list[str]:
    wanted = normalize_name(name)
    return sorted(
        normalize_name(e.target)  # type: ignore[arg-type]
        for e in graph.edges
        if e.kind is EdgeKind.IS_A and normalize_name(e.source) == wanted
    )


def find_anchor(graph: ConceptGraph, name: str) -> tuple[str | None, int]:
    """Nearest input-kind ancestor via is_a edges, with its distance.

    An input concept anchors itself at distance 0.  Ties at equal distance
    break alphabetically so the result is independent of edge order.
    """
    if graph.find(name) is None:
        raise UnknownConcept(name)
    start = normalize_name(name)
    frontier, seen, depth = [start], {start}, 0
    while frontier:
        for candidate in frontier:
            concept = graph.find(candidate)
            if concept is not None and concept.kind is ConceptKind.INPUT:
                return candidate, depth
        nxt = []
        for candidate in frontier:
            for parent in is_a_parents(graph, candidate):
                if parent not in seen:
                    seen.add(parent)
                    nxt.append(parent)
        frontier, depth = sorted(nxt), depth + 1
    return None, -1


def anchor_of(graph: ConceptGraph, name: str) -> str | None:
    return find_anchor(graph, name)[0]


def find_cycle(graph: ConceptGraph, kind: EdgeKind) -> list[str] | None:
    """First cycle through edges of the given kind, as a node path, or None."""
    adjacency: dict[str, list[str]] = {}
    for e in graph.edges:
        if e.kind is kind and e.target is not None:
            adjacency.setdefault(normalize_name(e.source), []).append(normalize_name(e.target))
    for targets in adjacency.values():
        targets.sort()

    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    path: list[str] = []

    def visit(node: str) -> list[str] | None:
        state[node] = 1
        path.append(node)
        for nxt in adjacency.get(node, ()):
            if state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            if state.get(nxt) is None:
                found = visit(nxt)
                if found:
                    return found
        path.pop()
        state[node] = 2
        return None

    for root in sorted(adjacency):
        if state.get(root) is None:
            found = visit(root)
            if found:
                return found
    return None


# --- diff metric ----------------------------------------------------------

@dataclass(frozen=True)
class DiffReport:
    missing_nodes: tuple[str, ...]
    extra_nodes: tuple[str, ...]
    missing_edges: tuple[str, ...]
    extra_edges: tuple[str, ...]

    @property
    def node_diff(self) -> int:
        return len(self.missing_nodes) + len(self.extra_nodes)

    @property
    def edge_diff(self) -> int:
        return len(self.missing_edges) + len(self.extra_edges)


def _edge_map(graph: ConceptGraph) -> dict[tuple, Edge]:
    return {e.descriptor(): e for e in graph.edges}


def graph_diff(candidate: ConceptGraph, gold: ConceptGraph) -> DiffReport:
    """Symmetric-difference counts of normalized concept names and edges."""
    cand_nodes, gold_nodes = candidate.concept_names(), gold.concept_names()
    cand_edges, gold_edges = _edge_map(candidate), _edge_map(gold)
    return DiffReport(
        missing_nodes=tuple(sorted(gold_nodes - cand_nodes)),
        extra_nodes=tuple(sorted(cand_nodes - gold_nodes)),
        missing_edges=tuple(
            gold_edges[d].describe() for d in sorted(set(gold_edges) - set(cand_edges), key=repr)
        ),
        extra_edges=tuple(
            cand_edges[d].describe() for d in sorted(set(cand_edges) - set(gold_edges), key=repr)
        ),
    )
