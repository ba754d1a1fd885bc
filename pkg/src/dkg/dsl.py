"""Surface language for knowledge declarations (`.dkg` files).

Grammar:

    program  := 'graph' IDENT '{' stmt* '}'
    stmt     := ('concept' | 'decision' 'concept') IDENT labelset? ';'
              | IDENT 'is_a' IDENT ';'
              | IDENT 'contains' IDENT ';'
              | IDENT 'has_a' '(' role (',' role)* ')' ';'
              | 'constraint' folExpr ';'
    labelset := 'labels' '{' IDENT (',' IDENT)* '}'
    role     := IDENT ':' IDENT

Comments run from `//` to end of line.  The parser recovers at statement
boundaries (skips to the next ';'), so a single pass surfaces every syntax
error in the file.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import core, fol
from .diagnostics import Diagnostic, error
from .lexer import LexError, Token, TokenStream, tokenize
from .spans import SourceSpan

STMT_KEYWORDS = frozenset({"concept", "decision", "labels", "constraint", "graph",
                           "is_a", "contains", "has_a"})


@dataclass(frozen=True)
class ParseResult:
    graph: core.ConceptGraph | None
    diagnostics: tuple[Diagnostic, ...]

    @property
    def syntax_error_free(self) -> bool:
        return not any(d.is_error and d.code.startswith("SYN") for d in self.diagnostics)


class _SyntaxError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _err(code: str, span: SourceSpan, message: str, hint: str) -> _SyntaxError:
    return _SyntaxError(error(code, span, message, hint))


class _Parser:
    def __init__(self, text: str, file: str | None = None):
        self.text = text
        self.file = file
        self.diagnostics: list[Diagnostic] = []
        self.concepts: list[core.Concept] = []
        self.edges: list[core.Edge] = []
        self.constraints: list[core.Constraint] = []
        self.ts = TokenStream(tokenize(text, file=file, comment="//"))

    # -- helpers -------------------------------------------------------------

    def expect_ident(self, what: str) -> Token:
        tok = self.ts.current
        if tok.kind == "eof":
            raise _err("SYN003", tok.span, f"unexpected end of input, expected {what}",
                       f"add the missing {what}")
        if tok.kind != "ident":
            raise _err("SYN001", tok.span, f"expected {what}, found {tok.text!r}",
                       f"insert an identifier for the {what}")
        return self.ts.advance()

    def expect(self, kind: str, hint: str) -> Token:
        tok = self.ts.current
        if tok.kind == "eof":
            raise _err("SYN003", tok.span, f"unexpected end of input, expected {kind!r}", hint)
        if tok.kind != kind:
            raise _err("SYN002", tok.span, f"expected {kind!r}, found {tok.text!r}", hint)
        return self.ts.advance()

    def skip_to_semicolon(self) -> None:
        while not self.ts.at("eof") and not self.ts.at("}"):
            if self.ts.accept(";"):
                return
            self.ts.advance()

    def statement_text(self, start: Token) -> str:
        """Raw source between a start token and the current position."""
        lines = self.text.splitlines()
        end = self.ts.tokens[max(self.ts.pos - 1, 0)].span
        if start.span.start_line == end.end_line:
            return lines[start.span.start_line - 1][start.span.start_col - 1:end.end_col - 1]
        chunk = [lines[start.span.start_line - 1][start.span.start_col - 1:]]
        chunk += lines[start.span.start_line:end.end_line - 1]
        chunk.append(lines[end.end_line - 1][:end.end_col - 1])
        return "\n".join(chunk)

    # -- grammar ---------------------------------------------------------------

    def parse_program(self) -> core.ConceptGraph | None:
        try:
            kw = self.ts.current
            if not self.ts.accept_word("graph"):
                raise _err("SYN002", kw.span, f"expected 'graph', found {kw.text!r}",
                           "start the program with 'graph <name> { ... }'")
            name = self.expect_ident("graph name")
            self.expect("{", "open the graph body with '{'")
        except _SyntaxError as exc:
            self.diagnostics.append(exc.diagnostic)
            return None
        while not self.ts.at("}") and not self.ts.at("eof"):
            try:
                self.parse_statement()
            except _SyntaxError as exc:
                self.diagnostics.append(exc.diagnostic)
                self.skip_to_semicolon()
        if not self.ts.accept("}"):
            self.diagnostics.append(error("SYN003", self.ts.current.span,
                                          "unexpected end of input, expected '}'",
                                          "close the graph body with '}'"))
        return core.ConceptGraph(name.text, tuple(self.concepts), tuple(self.edges),
                                 tuple(self.constraints))

    def parse_statement(self) -> None:
        tok = self.ts.current
        if tok.kind != "ident":
            raise _err("SYN002", tok.span, f"expected a statement, found {tok.text!r}",
                       "begin a concept, edge, or constraint statement")
        if tok.text in ("concept", "decision"):
            self.parse_concept_stmt()
        elif tok.text == "constraint":
            self.parse_constraint_stmt()
        else:
            self.parse_edge_stmt()

    def parse_concept_stmt(self) -> None:
        start = self.ts.advance()
        kind = core.ConceptKind.INPUT
        if start.text == "decision":
            kind = core.ConceptKind.DECISION
            kw = self.ts.accept_word("concept")
            if kw is None:
                raise _err("SYN002", self.ts.current.span,
                           "expected 'concept' after 'decision'",
                           "write 'decision concept <name>'")
        name = self.expect_ident("concept name")
        labels: tuple[str, ...] | None = None
        if self.ts.at_word("labels"):
            labels = self.parse_labelset()
        end = self.expect(";", "terminate the statement with ';'")
        span = start.span.merge(end.span)
        if labels is not None and kind is not core.ConceptKind.DECISION:
            raise _err("SYN004", span, f"label set on non-decision concept {name.text!r}",
                       f"declare it as 'decision concept {name.text}'")
        if any(core.normalize_name(c.name) == core.normalize_name(name.text)
               for c in self.concepts):
            raise _err("SYN002", name.span, f"duplicate declaration of concept {name.text!r}",
                       "remove or rename the duplicate declaration")
        self.concepts.append(core.Concept(name.text, kind, labels, span=span))

    def parse_labelset(self) -> tuple[str, ...]:
        kw = self.ts.advance()
        self.expect("{", "open the label set with '{'")
        labels = [self.expect_ident("label").text]
        while self.ts.accept(","):
            labels.append(self.expect_ident("label").text)
        close = self.expect("}", "close the label set with '}'")
        if len(set(labels)) < 2:
            raise _err("SYN004", kw.span.merge(close.span),
                       "label set needs at least 2 distinct labels",
                       "enumerate every decision label explicitly")
        return tuple(labels)

    def parse_edge_stmt(self) -> None:
        source = self.ts.advance()
        kw = self.ts.current
        if kw.kind != "ident" or kw.text not in ("is_a", "contains", "has_a"):
            raise _err("SYN002", kw.span,
                       f"expected 'is_a', 'contains', or 'has_a' after {source.text!r}",
                       "use one of the three edge kinds")
        self.ts.advance()
        if kw.text == "has_a":
            self.parse_has_a(source)
            return
        target = self.expect_ident("edge target")
        end = self.expect(";", "terminate the statement with ';'")
        kind = core.EdgeKind.IS_A if kw.text == "is_a" else core.EdgeKind.CONTAINS
        self.edges.append(core.Edge(kind, source.text, target.text,
                                    span=source.span.merge(end.span)))

    def parse_has_a(self, source: Token) -> None:
        self.expect("(", "open the role list with '('")
        roles: list[tuple[str, str]] = []
        while True:
            role = self.expect_ident("role name")
            self.expect(":", "separate role and concept with ':'")
            target = self.expect_ident("role concept")
            roles.append((role.text, target.text))
            if not self.ts.accept(","):
                break
        self.expect(")", "close the role list with ')'")
        end = self.expect(";", "terminate the statement with ';'")
        span = source.span.merge(end.span)
        if len(roles) < 2:
            # semantic guard applied at parse time: a has_a with one role is not
            # representable in the model
            self.diagnostics.append(error(
                "SEM005", span, f"has_a on {source.text!r} needs at least 2 roles",
                "list two or more 'role: concept' pairs"))
            return
        self.edges.append(core.Edge(core.EdgeKind.HAS_A, source.text, roles=tuple(roles),
                                    span=span))

    def parse_constraint_stmt(self) -> None:
        kw = self.ts.advance()
        expr_start = self.ts.current
        try:
            ast = fol.parse_fol_expr(self.ts)
        except fol._FolSyntaxError as exc:
            raise _SyntaxError(exc.diagnostic) from exc
        end = self.expect(";", "terminate the constraint with ';'")
        source_text = self.statement_text(expr_start).rstrip(";").strip()
        lowered, diags = fol.lower_fol(ast)
        self.diagnostics.extend(diags)
        if lowered is not None:
            span = kw.span.merge(end.span)
            self.constraints.append(core.Constraint(lowered, source_text=source_text))


def parse_graph(text: str, file: str | None = None) -> ParseResult:
    """Parse a `.dkg` program; diagnostics are in-band, never raised."""
    try:
        parser = _Parser(text, file=file)
    except LexError as exc:
        return ParseResult(None, (error("SYN002", exc.span, str(exc),
                                        "remove the invalid character"),))
    graph = parser.parse_program()
    diags = tuple(sorted(parser.diagnostics, key=Diagnostic.sort_key))
    if any(d.is_error and d.code.startswith("SYN") for d in diags):
        graph = None
    return ParseResult(graph, diags)


def parse_constraint_block(text: str, file: str | None = None
                           ) -> tuple[list[core.Constraint], list[Diagnostic]]:
    """Parse a block of `constraint <expr>;` statements."""
    try:
        parser = _Parser(text, file=file)
    except LexError as exc:
        return [], [error("SYN002", exc.span, str(exc), "remove the invalid character")]
    while not parser.ts.at("eof"):
        try:
            kw = parser.ts.current
            if not parser.ts.at_word("constraint"):
                raise _err("SYN002", kw.span, f"expected 'constraint', found {kw.text!r}",
                           "start each statement with 'constraint'")
            parser.parse_constraint_stmt()
        except _SyntaxError as exc:
            parser.diagnostics.append(exc.diagnostic)
            parser.skip_to_semicolon()
    return parser.constraints, sorted(parser.diagnostics, key=Diagnostic.sort_key)


# --- emission ---------------------------------------------------------------

_EDGE_ORDER = (core.EdgeKind.IS_A, core.EdgeKind.CONTAINS, core.EdgeKind.HAS_A)


def emit_graph(graph: core.ConceptGraph) -> str:
    """Canonical source form: concepts in declaration order, edges grouped by
    kind, constraints last; two-space indent, LF newlines."""
    lines: list[str] = []
    for c in graph.concepts:
        head = "decision concept" if c.kind is core.ConceptKind.DECISION else "concept"
        labels = f" labels {{ {', '.join(c.label_set)} }}" if c.label_set else ""
        lines.append(f"{head} {c.name}{labels};")
    for kind in _EDGE_ORDER:
        for e in graph.edges:
            if e.kind is kind:
                if kind is core.EdgeKind.HAS_A:
                    inner = ", ".join(f"{r}: {t}" for r, t in e.roles)
                    lines.append(f"{e.source} has_a({inner});")
                else:
                    lines.append(f"{e.source} {kind.value} {e.target};")
    for constraint in graph.constraints:
        lines.append(fol.emit_constraint(constraint))
    if not lines:
        return f"graph {graph.name} {{ }}\n"
    body = "\n".join(f"  {line}" for line in lines)
    return f"graph {graph.name} {{\n{body}\n}}\n"
