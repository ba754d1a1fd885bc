"""Tokenizer shared by the graph DSL and the FOL surface syntax."""

from __future__ import annotations

from dataclasses import dataclass

from .spans import SourceSpan

PUNCT = ("<->", "->", "{", "}", "(", ")", ";", ":", ",", "=")

# Unicode logic symbols accepted as aliases for their ASCII spellings.
UNICODE_ALIASES = {
    "∀": "forall",
    "∃": "exists",
    "∧": "and",
    "∨": "or",
    "¬": "not",
    "→": "->",
    "↔": "<->",
}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "number", one of PUNCT, or "eof"
    text: str
    span: SourceSpan


class LexError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.span = span


def tokenize(text: str, file: str | None = None, comment: str = "//") -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)

    def span(length: int, l: int, c: int) -> SourceSpan:
        return SourceSpan(l, c, l, c + length, file)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if comment and text.startswith(comment, i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in UNICODE_ALIASES:
            alias = UNICODE_ALIASES[ch]
            kind = alias if alias in PUNCT else "ident"
            tokens.append(Token(kind, alias, span(1, line, col)))
            i, col = i + 1, col + 1
            continue
        matched = next((p for p in PUNCT if text.startswith(p, i)), None)
        if matched:
            tokens.append(Token(matched, matched, span(len(matched), line, col)))
            i, col = i + len(matched), col + len(matched)
            continue
        if ch.isascii() and ch.isalpha():
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], span(j - i, line, col)))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("number", text[i:j], span(j - i, line, col)))
            col += j - i
            i = j
            continue
        raise LexError(f"unexpected character {ch!r}", span(1, line, col))

    tokens.append(Token("eof", "", SourceSpan(line, col, line, col, file)))
    return tokens


class TokenStream:
    """Cursor over a token list with single-token lookahead helpers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.current
        return tok.kind == kind and (text is None or tok.text == text)

    def at_word(self, word: str) -> bool:
        return self.at("ident", word)

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.advance()
        return None

    def accept_word(self, word: str) -> Token | None:
        return self.accept("ident", word)
