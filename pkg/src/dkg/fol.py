"""First-order-logic surface syntax: parsing, predicate extraction, and
deterministic compilation into grounded constraint ASTs.

The FOL layer is the human-validation surface: an LLM (or a person) writes
standard FOL text, we parse it, extract its predicate signatures, and compile
it against a concept graph.  Unsupported constructs (equality, function
symbols, quantifiers without a concept domain) are rejected with SEM012
rather than silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import core
from .diagnostics import Diagnostic, error
from .lexer import LexError, Token, TokenStream, tokenize
from .spans import POINT, SourceSpan

QUANTIFIERS = ("forall", "exists")
CARDINALITY = ("exactly_one", "exactly", "at_most", "at_least")
KEYWORDS = frozenset(QUANTIFIERS + CARDINALITY + ("in", "not", "and", "or"))


# --- surface AST ------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """A predicate argument: a variable, or a function application (which the
    compiler rejects but the parser must still represent)."""

    name: str
    args: tuple[Term, ...] | None = None  # None = plain variable
    span: SourceSpan = field(default=POINT, compare=False)


@dataclass(frozen=True)
class FNode:
    span: SourceSpan = field(default=POINT, compare=False, kw_only=True)


@dataclass(frozen=True)
class FAtom(FNode):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class FEq(FNode):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class FNot(FNode):
    child: FNode


@dataclass(frozen=True)
class FAnd(FNode):
    children: tuple[FNode, ...]


@dataclass(frozen=True)
class FOr(FNode):
    children: tuple[FNode, ...]


@dataclass(frozen=True)
class FImplies(FNode):
    lhs: FNode
    rhs: FNode


@dataclass(frozen=True)
class FIff(FNode):
    lhs: FNode
    rhs: FNode


@dataclass(frozen=True)
class FQuant(FNode):
    quantifier: str  # "forall" | "exists"
    var: str
    domain: str | None  # explicit `in concept` domain
    body: FNode


@dataclass(frozen=True)
class FCount(FNode):
    mode: str  # "exactly" | "at_most" | "at_least"
    k: int
    children: tuple[FNode, ...]


def fol_walk(node: FNode):
    yield node
    for f in ("child", "lhs", "rhs", "body"):
        sub = getattr(node, f, None)
        if isinstance(sub, FNode):
            yield from fol_walk(sub)
    for sub in getattr(node, "children", ()):
        yield from fol_walk(sub)


# --- parser -----------------------------------------------------------------

class _FolSyntaxError(Exception):
    def __init__(self, message: str, span: SourceSpan, hint: str):
        super().__init__(message)
        self.diagnostic = error("SYN005", span, message, hint)


def parse_fol_expr(ts: TokenStream) -> FNode:
    """Parse one FOL expression from a token stream; raises on syntax error.

    Exposed so the graph DSL can reuse this grammar for constraint statements.
    """
    return _parse_iff(ts)


def _parse_iff(ts: TokenStream) -> FNode:
    node = _parse_implies(ts)
    while ts.at("<->"):
        ts.advance()
        rhs = _parse_implies(ts)
        node = FIff(node, rhs, span=node.span.merge(rhs.span))
    return node


def _parse_implies(ts: TokenStream) -> FNode:
    node = _parse_or(ts)
    if ts.at("->"):
        ts.advance()
        rhs = _parse_implies(ts)  # right-associative
        node = FImplies(node, rhs, span=node.span.merge(rhs.span))
    return node


def _parse_or(ts: TokenStream) -> FNode:
    children = [_parse_and(ts)]
    while ts.accept_word("or"):
        children.append(_parse_and(ts))
    if len(children) == 1:
        return children[0]
    return FOr(tuple(children), span=children[0].span.merge(children[-1].span))


def _parse_and(ts: TokenStream) -> FNode:
    children = [_parse_unary(ts)]
    while ts.accept_word("and"):
        children.append(_parse_unary(ts))
    if len(children) == 1:
        return children[0]
    return FAnd(tuple(children), span=children[0].span.merge(children[-1].span))


def _parse_unary(ts: TokenStream) -> FNode:
    tok = ts.current
    if ts.accept_word("not"):
        child = _parse_unary(ts)
        return FNot(child, span=tok.span.merge(child.span))
    if tok.kind == "ident" and tok.text in QUANTIFIERS:
        return _parse_quantifier(ts)
    return _parse_primary(ts)


def _parse_quantifier(ts: TokenStream) -> FNode:
    head = ts.advance()
    var = _expect_ident(ts, "quantifier variable")
    domain = None
    if ts.accept_word("in"):
        domain = _expect_ident(ts, "domain concept")
    if not ts.accept(":"):
        raise _FolSyntaxError(
            f"expected ':' after quantifier variable {var.text!r}",
            ts.current.span,
            "write the quantifier as 'forall x: ...' or 'forall x in concept: ...'",
        )
    body = parse_fol_expr(ts)
    return FQuant(head.text, var.text, domain.text if domain else None, body,
                  span=head.span.merge(body.span))


def _parse_primary(ts: TokenStream) -> FNode:
    tok = ts.current
    if ts.accept("("):
        node = parse_fol_expr(ts)
        if not ts.accept(")"):
            raise _FolSyntaxError("expected ')'", ts.current.span, "close the parenthesized group")
        return node
    if tok.kind == "ident" and tok.text in CARDINALITY:
        return _parse_count(ts)
    if tok.kind != "ident" or tok.text in KEYWORDS:
        raise _FolSyntaxError(
            f"expected a predicate application, found {tok.text or 'end of input'!r}",
            tok.span,
            "write an atom such as 'concept(x)'",
        )
    lhs = _parse_term(ts)
    if ts.accept("="):
        rhs = _parse_term(ts)
        return FEq(lhs, rhs, span=lhs.span.merge(rhs.span))
    if lhs.args is None:
        raise _FolSyntaxError(
            f"bare identifier {lhs.name!r} is not a formula",
            lhs.span,
            "apply the predicate to a variable, e.g. " + f"'{lhs.name}(x)'",
        )
    return FAtom(lhs.name, lhs.args, span=lhs.span)


def _parse_count(ts: TokenStream) -> FNode:
    head = ts.advance()
    if not ts.accept("("):
        raise _FolSyntaxError(f"expected '(' after {head.text!r}", ts.current.span,
                              f"write '{head.text}(...)'")
    if head.text == "exactly_one":
        mode, k = "exactly", 1
    else:
        mode = head.text
        num = ts.accept("number")
        if num is None or not ts.accept(","):
            raise _FolSyntaxError(
                f"{head.text} needs a leading integer bound",
                ts.current.span,
                f"write '{head.text}(k, ...)' with a nonnegative integer k",
            )
        k = int(num.text)
    children = [parse_fol_expr(ts)]
    while ts.accept(","):
        children.append(parse_fol_expr(ts))
    close = ts.accept(")")
    if close is None:
        raise _FolSyntaxError("expected ')' to close the operand list", ts.current.span,
                              "close the cardinality operand list")
    return FCount(mode, k, tuple(children), span=head.span.merge(close.span))


def _parse_term(ts: TokenStream) -> Term:
    name = _expect_ident(ts, "term")
    if ts.accept("("):
        args = [_parse_term(ts)]
        while ts.accept(","):
            args.append(_parse_term(ts))
        close = ts.accept(")")
        if close is None:
            raise _FolSyntaxError("expected ')' in argument list", ts.current.span,
                                  "close the argument list")
        return Term(name.text, tuple(args), span=name.span.merge(close.span))
    return Term(name.text, None, span=name.span)


def _expect_ident(ts: TokenStream, what: str) -> Token:
    tok = ts.current
    if tok.kind != "ident" or tok.text in KEYWORDS:
        raise _FolSyntaxError(f"expected {what}, found {tok.text or 'end of input'!r}",
                              tok.span, f"supply an identifier for the {what}")
    return ts.advance()


def parse_fol(text: str, file: str | None = None) -> tuple[FNode | None, list[Diagnostic]]:
    """Parse one FOL formula; returns (ast-or-None, diagnostics)."""
    try:
        ts = TokenStream(tokenize(text, file=file, comment="#"))
        node = parse_fol_expr(ts)
        if not ts.at("eof"):
            tok = ts.current
            raise _FolSyntaxError(f"unexpected trailing input {tok.text!r}", tok.span,
                                  "remove text after the formula")
        return node, []
    except _FolSyntaxError as exc:
        return None, [exc.diagnostic]
    except LexError as exc:
        return None, [error("SYN002", exc.span, str(exc), "remove the invalid character")]


def parse_fol_file(text: str, file: str | None = None) -> list[tuple[str, FNode | None, list[Diagnostic]]]:
    """Parse a .fol file: one formula per line, '#' comments, blank lines skipped."""
    results = []
    for idx, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        ast, diags = parse_fol(stripped, file=file)
        # rebase spans onto the file's line numbers
        diags = [Diagnostic(d.code, d.severity,
                            SourceSpan(idx, d.span.start_col, idx, d.span.end_col, file),
                            d.message, d.hint)
                 for d in diags]
        results.append((stripped, ast, diags))
    return results


# --- predicate extraction ---------------------------------------------------

class InconsistentArity(Exception):
    def __init__(self, name: str, arities: tuple[int, int]):
        super().__init__(f"predicate {name!r} used with arities {arities[0]} and {arities[1]}")
        self.name = name


@dataclass(frozen=True)
class PredicateSig:
    name: str
    arity: int
    binding_concepts: tuple[str | None, ...]  # quantifier domain per argument, if known


def extract_predicates(ast: FNode) -> list[PredicateSig]:
    """Distinct (name, arity) signatures in first-occurrence order, with
    argument domains inferred from explicit quantifier domains."""
    sigs: dict[str, PredicateSig] = {}

    def visit(node: FNode, domains: dict[str, str]) -> None:
        if isinstance(node, FQuant):
            inner = dict(domains)
            if node.domain:
                inner[node.var] = node.domain
            visit(node.body, inner)
            return
        if isinstance(node, FAtom):
            bindings = tuple(
                domains.get(t.name) if t.args is None else None for t in node.args
            )
            prior = sigs.get(node.name)
            if prior is None:
                sigs[node.name] = PredicateSig(node.name, len(node.args), bindings)
            elif prior.arity != len(node.args):
                raise InconsistentArity(node.name, (prior.arity, len(node.args)))
            return
        for f in ("child", "lhs", "rhs"):
            sub = getattr(node, f, None)
            if isinstance(sub, FNode):
                visit(sub, domains)
        for sub in getattr(node, "children", ()):
            visit(sub, domains)

    visit(ast, {})
    return list(sigs.values())


# --- lowering and grounding -------------------------------------------------

_COUNT_NODES = {"exactly": core.ExactlyK, "at_most": core.AtMostK, "at_least": core.AtLeastK}


def _unsupported(span: SourceSpan, what: str, hint: str) -> Diagnostic:
    return error("SEM012", span, f"unsupported logic operation: {what}", hint)


def lower_fol(ast: FNode) -> tuple[core.CNode | None, list[Diagnostic]]:
    """Structural FOL -> constraint-AST lowering (no graph knowledge).

    Quantifiers must carry a concept domain, either explicitly
    (`forall x in c:`) or by guard pattern (`forall x: c(x) -> ...`,
    `exists x: c(x) and ...`).
    """
    diags: list[Diagnostic] = []

    def lower(node: FNode) -> core.CNode | None:
        if isinstance(node, FAtom):
            args = []
            for t in node.args:
                if t.args is not None:
                    diags.append(_unsupported(t.span, f"function symbol {t.name!r}",
                                              "apply predicates to plain variables only"))
                    return None
                args.append(t.name)
            return core.Predicate(node.name, tuple(args), span=node.span)
        if isinstance(node, FEq):
            diags.append(_unsupported(node.span, "equality between variables",
                                      "express the relation through concepts or roles instead"))
            return None
        if isinstance(node, FNot):
            child = lower(node.child)
            return None if child is None else core.Not(child, span=node.span)
        if isinstance(node, (FAnd, FOr)):
            children = [lower(c) for c in node.children]
            if any(c is None for c in children):
                return None
            ctor = core.And if isinstance(node, FAnd) else core.Or
            return ctor(tuple(children), span=node.span)
        if isinstance(node, FImplies):
            lhs, rhs = lower(node.lhs), lower(node.rhs)
            return None if lhs is None or rhs is None else core.Implies(lhs, rhs, span=node.span)
        if isinstance(node, FIff):
            lhs, rhs = lower(node.lhs), lower(node.rhs)
            return None if lhs is None or rhs is None else core.Iff(lhs, rhs, span=node.span)
        if isinstance(node, FCount):
            children = [lower(c) for c in node.children]
            if any(c is None for c in children):
                return None
            return _COUNT_NODES[node.mode](node.k, tuple(children), span=node.span)
        if isinstance(node, FQuant):
            return _lower_quantifier(node)
        raise TypeError(f"unhandled FOL node {type(node).__name__}")

    def _guard_atom(node: FNode, var: str) -> str | None:
        """c(x) guard over exactly the quantified variable -> concept name."""
        if (isinstance(node, FAtom) and len(node.args) == 1
                and node.args[0].args is None and node.args[0].name == var):
            return node.name
        return None

    def _lower_quantifier(node: FQuant) -> core.CNode | None:
        ctor = core.ForAll if node.quantifier == "forall" else core.Exists
        if node.domain is not None:
            body = lower(node.body)
            return None if body is None else ctor(node.var, node.domain, body, span=node.span)
        if node.quantifier == "forall" and isinstance(node.body, FImplies):
            domain = _guard_atom(node.body.lhs, node.var)
            if domain is not None:
                rest = lower(node.body.rhs)
                return None if rest is None else ctor(node.var, domain, rest, span=node.span)
        if node.quantifier == "exists" and isinstance(node.body, FAnd):
            domain = _guard_atom(node.body.children[0], node.var)
            if domain is not None:
                rest_nodes = node.body.children[1:]
                rest_f: FNode = rest_nodes[0] if len(rest_nodes) == 1 else FAnd(rest_nodes, span=node.span)
                rest = lower(rest_f)
                return None if rest is None else ctor(node.var, domain, rest, span=node.span)
        diags.append(_unsupported(
            node.span,
            f"quantifier over {node.var!r} without a concept domain",
            f"write '{node.quantifier} {node.var} in <concept>: ...' or guard the "
            f"variable with a concept predicate",
        ))
        return None

    lowered = lower(ast)
    return lowered, diags


def ground_check(node: core.CNode, graph: core.ConceptGraph) -> list[Diagnostic]:
    """Check a constraint AST against a graph: every predicate must resolve to
    a declared concept (unary) or has_a role (binary), with bound variables."""
    diags: list[Diagnostic] = []
    concepts = graph.concept_names()
    roles = graph.role_names()

    def visit(n: core.CNode, bound: dict[str, str]) -> None:
        if isinstance(n, (core.ForAll, core.Exists)):
            if core.normalize_name(n.domain) not in concepts:
                diags.append(error("SEM001", n.span,
                                   f"unknown concept {n.domain!r} as quantifier domain",
                                   f"declare concept {n.domain!r} or quantify over an existing one"))
            visit(n.body, {**bound, n.var: n.domain})
            return
        if isinstance(n, core.Predicate):
            name = core.normalize_name(n.name)
            if name in concepts:
                if len(n.args) != 1:
                    diags.append(error("SEM006", n.span,
                                       f"concept predicate {n.name!r} takes exactly 1 argument, got {len(n.args)}",
                                       f"apply {n.name!r} to a single variable"))
            elif name in roles:
                if len(n.args) != 2:
                    diags.append(error("SEM006", n.span,
                                       f"role predicate {n.name!r} takes exactly 2 arguments, got {len(n.args)}",
                                       f"apply {n.name!r} to (owner, filler) variables"))
            else:
                diags.append(error("SEM001", n.span,
                                   f"unknown predicate {n.name!r}",
                                   f"declare a concept or has_a role named {n.name!r}"))
            for var in n.args:
                if var not in bound:
                    diags.append(error("SEM007", n.span,
                                       f"variable {var!r} is not bound by any quantifier",
                                       f"bind {var!r} with forall/exists before using it"))
            return
        for f in ("child", "lhs", "rhs", "body"):
            sub = getattr(n, f, None)
            if isinstance(sub, core.CNode):
                visit(sub, bound)
        for sub in getattr(n, "children", ()):
            visit(sub, bound)

    visit(node, {})
    return diags


def compile_fol(ast: FNode, graph: core.ConceptGraph,
                source_text: str | None = None) -> tuple[core.Constraint | None, list[Diagnostic]]:
    """Deterministically compile a parsed FOL formula against a graph."""
    lowered, diags = lower_fol(ast)
    if lowered is None:
        return None, diags
    diags = diags + ground_check(lowered, graph)
    if any(d.is_error for d in diags):
        return None, diags
    return core.Constraint(lowered, source_text=source_text), diags


# --- emission ---------------------------------------------------------------

def emit_expr(node: core.CNode, *, parenthesize: bool = False) -> str:
    """Deterministic constraint-AST rendering in the DSL expression grammar."""
    def group(n: core.CNode) -> str:
        compound = isinstance(n, (core.And, core.Or, core.Implies, core.Iff,
                                  core.ForAll, core.Exists))
        return emit_expr(n, parenthesize=compound)

    if isinstance(node, core.Predicate):
        text = f"{node.name}({', '.join(node.args)})"
    elif isinstance(node, core.Not):
        text = f"not {group(node.child)}"
    elif isinstance(node, core.And):
        text = " and ".join(group(c) for c in node.children)
    elif isinstance(node, core.Or):
        text = " or ".join(group(c) for c in node.children)
    elif isinstance(node, core.Implies):
        text = f"{group(node.lhs)} -> {group(node.rhs)}"
    elif isinstance(node, core.Iff):
        text = f"{group(node.lhs)} <-> {group(node.rhs)}"
    elif isinstance(node, (core.ForAll, core.Exists)):
        word = "forall" if isinstance(node, core.ForAll) else "exists"
        text = f"{word} {node.var} in {node.domain}: {emit_expr(node.body)}"
    elif isinstance(node, core.ExactlyK):
        args = ", ".join(emit_expr(c) for c in node.children)
        text = f"exactly_one({args})" if node.k == 1 else f"exactly({node.k}, {args})"
    elif isinstance(node, core.AtMostK):
        text = f"at_most({node.k}, {', '.join(emit_expr(c) for c in node.children)})"
    elif isinstance(node, core.AtLeastK):
        text = f"at_least({node.k}, {', '.join(emit_expr(c) for c in node.children)})"
    else:
        raise TypeError(f"unhandled constraint node {type(node).__name__}")
    return f"({text})" if parenthesize else text


def free_variables(node: core.CNode) -> set[str]:
    """Variables used in predicates but not bound by an enclosing quantifier."""
    free: set[str] = set()

    def visit(n: core.CNode, bound: frozenset[str]) -> None:
        if isinstance(n, core.Predicate):
            free.update(v for v in n.args if v not in bound)
            return
        if isinstance(n, (core.ForAll, core.Exists)):
            visit(n.body, bound | {n.var})
            return
        for f in ("child", "lhs", "rhs"):
            sub = getattr(n, f, None)
            if isinstance(sub, core.CNode):
                visit(sub, bound)
        for sub in getattr(n, "children", ()):
            visit(sub, bound)

    visit(node, frozenset())
    return free


def emit_constraint(constraint: core.Constraint | core.CNode) -> str:
    """Serialize a constraint as a DSL statement; requires a closed formula."""
    node = constraint.node if isinstance(constraint, core.Constraint) else constraint
    unbound = free_variables(node)
    if unbound:
        raise ValueError(f"cannot emit open formula; unbound: {sorted(unbound)}")
    return f"constraint {emit_expr(node)};"
