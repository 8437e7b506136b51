"""Boolean query language over indexed metadata fields.

Grammar (operators are the reserved uppercase words AND, OR, NOT):

    query  := disj
    disj   := conj ("OR" conj)*
    conj   := unary (["AND"] unary)*      adjacency is an implicit AND
    unary  := ["NOT"] atom
    atom   := "(" disj ")" | term
    term   := [keyword ":"] (bareword | quoted-string) | "*"

Barewords may contain the wildcards "*" (any run) and "?" (one character).
A lone "*" with no field is the match-all query.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QuerySyntaxError


@dataclass(frozen=True)
class MatchAll:
    pass


@dataclass(frozen=True)
class Term:
    field: str | None
    pattern: str

    @property
    def has_wildcard(self) -> bool:
        return "*" in self.pattern or "?" in self.pattern


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And requires at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or requires at least two children")


@dataclass(frozen=True)
class Not:
    child: object


QueryAst = MatchAll | Term | And | Or | Not

_RESERVED = {"AND", "OR", "NOT"}

# Anything printable except whitespace and the structural characters.
_BAREWORD = re.compile(r'[^\s:()"]+')
_FIELD = re.compile(r"[A-Za-z0-9_]+")


@dataclass(frozen=True)
class _Token:
    kind: str  # AND OR NOT LPAREN RPAREN WORD QUOTED COLON END
    text: str
    pos: int


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("LPAREN", c, i))
            i += 1
        elif c == ")":
            tokens.append(_Token("RPAREN", c, i))
            i += 1
        elif c == ":":
            tokens.append(_Token("COLON", c, i))
            i += 1
        elif c == '"':
            j = i + 1
            buf = []
            while j < n:
                if text[j] == "\\" and j + 1 < n and text[j + 1] in '"\\':
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == '"':
                    break
                buf.append(text[j])
                j += 1
            if j >= n:
                raise QuerySyntaxError("unterminated quoted string", i)
            tokens.append(_Token("QUOTED", "".join(buf), i))
            i = j + 1
        else:
            m = _BAREWORD.match(text, i)
            if not m:
                raise QuerySyntaxError(f"unexpected character {c!r}", i)
            word = m.group(0)
            kind = word if word in _RESERVED else "WORD"
            tokens.append(_Token(kind, word, i))
            i = m.end()
    tokens.append(_Token("END", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> QueryAst:
        node = self.disj()
        tok = self.peek()
        if tok.kind != "END":
            raise QuerySyntaxError(f"expected end of query, found {tok.text!r}", tok.pos)
        return node

    def disj(self) -> QueryAst:
        children = [self.conj()]
        while self.peek().kind == "OR":
            self.next()
            children.append(self.conj())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def conj(self) -> QueryAst:
        children = [self.unary()]
        while True:
            tok = self.peek()
            if tok.kind == "AND":
                self.next()
                children.append(self.unary())
            elif tok.kind in ("NOT", "WORD", "QUOTED", "LPAREN"):
                children.append(self.unary())  # implicit AND
            else:
                break
        return children[0] if len(children) == 1 else And(tuple(children))

    def unary(self) -> QueryAst:
        if self.peek().kind == "NOT":
            self.next()
            return Not(self.atom())
        return self.atom()

    def atom(self) -> QueryAst:
        tok = self.peek()
        if tok.kind == "LPAREN":
            self.next()
            node = self.disj()
            closing = self.peek()
            if closing.kind != "RPAREN":
                raise QuerySyntaxError('expected ")"', closing.pos)
            self.next()
            return node
        return self.term()

    def term(self) -> QueryAst:
        tok = self.peek()
        if tok.kind == "QUOTED":
            self.next()
            return Term(None, tok.text)
        if tok.kind != "WORD":
            raise QuerySyntaxError(
                f"expected a term, found {tok.text!r}" if tok.text else "expected a term",
                tok.pos)
        self.next()
        if self.peek().kind == "COLON":
            field = tok.text
            if not _FIELD.fullmatch(field):
                raise QuerySyntaxError(f"invalid field name {field!r}", tok.pos)
            self.next()
            value = self.peek()
            if value.kind == "QUOTED":
                self.next()
                return Term(field, value.text)
            if value.kind == "WORD":
                self.next()
                return Term(field, value.text)
            raise QuerySyntaxError(
                f"expected a value after {field}:, found {value.text!r}" if value.text
                else f"expected a value after {field}:",
                value.pos)
        if tok.text == "*":
            return MatchAll()
        return Term(None, tok.text)


def parse_query(text: str) -> QueryAst:
    """Parse query text into an AST; raises QuerySyntaxError on bad input."""
    tokens = _lex(text)
    if tokens[0].kind == "END":
        raise QuerySyntaxError("empty query", 0)
    return _Parser(tokens).parse()
