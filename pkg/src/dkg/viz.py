"""Visualization exports: a layout-free structural view for UI clients and a
DOT rendering for the command line."""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import core

LAYOUT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LayoutNode:
    id: str
    label: str
    kind: str
    anchor_id: str | None = None
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class LayoutLink:
    kind: str
    source: str
    target: str | None = None
    roles: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class LayoutGraph:
    name: str
    nodes: tuple[LayoutNode, ...]
    links: tuple[LayoutLink, ...]

    def to_json(self) -> str:
        return json.dumps({
            "version": LAYOUT_SCHEMA_VERSION,
            "name": self.name,
            "nodes": [
                {"id": n.id, "label": n.label, "kind": n.kind,
                 "anchorId": n.anchor_id, "labels": list(n.labels)}
                for n in self.nodes
            ],
            "links": [
                {"kind": l.kind, "source": l.source, "target": l.target,
                 "roles": [{"role": r, "target": t} for r, t in l.roles]}
                for l in self.links
            ],
        }, sort_keys=True)


def to_layout(graph: core.ConceptGraph) -> LayoutGraph:
    """One node per concept (with resolved anchor), one link per edge."""
    has_cycle = core.find_cycle(graph, core.EdgeKind.IS_A) is not None
    nodes = []
    for c in graph.concepts:
        name = core.normalize_name(c.name)
        anchor = None if has_cycle else core.anchor_of(graph, c.name)
        nodes.append(LayoutNode(
            id=name, label=c.name, kind=c.kind.value,
            anchor_id=anchor if anchor != name else None,
            labels=c.label_set or ()))
    links = []
    for e in graph.edges:
        if e.kind is core.EdgeKind.HAS_A:
            links.append(LayoutLink(
                e.kind.value, core.normalize_name(e.source),
                roles=tuple((core.normalize_name(r), core.normalize_name(t))
                            for r, t in e.roles)))
        else:
            links.append(LayoutLink(e.kind.value, core.normalize_name(e.source),
                                    core.normalize_name(e.target)))
    return LayoutGraph(graph.name, tuple(nodes), tuple(links))


_EDGE_STYLE = {
    core.EdgeKind.IS_A: 'style=dashed, label="is_a"',
    core.EdgeKind.CONTAINS: 'style=solid, label="contains"',
    core.EdgeKind.HAS_A: "",  # role label applied per endpoint
}


def _quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def to_dot(graph: core.ConceptGraph) -> str:
    """Deterministic DOT digraph: nodes and edges emitted in sorted order,
    edge kinds visually distinct."""
    lines = [f"digraph {_quote(graph.name)} {{", "  rankdir=BT;",
             "  node [shape=box, fontname=Helvetica];"]
    for c in sorted(graph.concepts, key=lambda c: core.normalize_name(c.name)):
        name = core.normalize_name(c.name)
        attrs = ["style=filled", 'fillcolor="#fde2b8"'] \
            if c.kind is core.ConceptKind.DECISION else ["style=filled",
                                                         'fillcolor="#d3e7f5"']
        label = c.name if not c.label_set else f"{c.name}\\n{{{', '.join(c.label_set)}}}"
        lines.append(f"  {_quote(name)} [label={_quote(label)}, " + ", ".join(attrs) + "];")
    for e in sorted(graph.edges, key=lambda e: repr(e.descriptor())):
        src = _quote(core.normalize_name(e.source))
        if e.kind is core.EdgeKind.HAS_A:
            for role, target in e.roles:
                lines.append(f"  {src} -> {_quote(core.normalize_name(target))} "
                             f"[style=bold, label={_quote('has_a.' + role)}];")
        else:
            lines.append(f"  {src} -> {_quote(core.normalize_name(e.target))} "
                         f"[{_EDGE_STYLE[e.kind]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
