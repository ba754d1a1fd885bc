"""dkg: natural-language task descriptions to declarative knowledge
declarations (concept graphs + first-order-logic constraints), with an
LLM front end and a symbolic validate/refine loop."""

from .core import (
    Concept,
    ConceptGraph,
    ConceptKind,
    Constraint,
    DiffReport,
    Edge,
    EdgeKind,
    add_concept,
    add_edge,
    anchor_of,
    graph_diff,
)
from .diagnostics import Diagnostic, Severity, ValidationReport
from .dsl import ParseResult, emit_graph, parse_constraint_block, parse_graph
from .fol import compile_fol, emit_constraint, extract_predicates, parse_fol
from .validator import classify, render_feedback, validate

__version__ = "0.1.0"

__all__ = [
    "Concept", "ConceptGraph", "ConceptKind", "Constraint", "DiffReport",
    "Edge", "EdgeKind", "add_concept", "add_edge", "anchor_of", "graph_diff",
    "Diagnostic", "Severity", "ValidationReport",
    "ParseResult", "emit_graph", "parse_constraint_block", "parse_graph",
    "compile_fol", "emit_constraint", "extract_predicates", "parse_fol",
    "classify", "render_feedback", "validate",
    "__version__",
]
