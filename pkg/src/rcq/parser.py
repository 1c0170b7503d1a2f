"""Recursive-descent parser for the textual query syntax.

Grammar (keywords are case-sensitive)::

    query   := "FALSE" | "TRUE" | ident "=" term | ident "=" ident "*" ident
             | ident "(" term {"," term} ")" | "NOT" query
             | query "AND" query | query "OR" query | query "->" query
             | ("EXISTS" | "FORALL") ident {"," ident} "." query
             | "CNT" ident "OVER" ident {"," ident} "." query
             | "(" query ")"
    term    := ident | integer | quoted-string

Precedence from tightest to loosest is NOT, AND, OR, ``->``.  Binder bodies
extend as far to the right as possible.  ``FORALL v. Q`` is read as
``NOT EXISTS v. NOT Q`` and ``A -> B`` as ``(NOT A) OR B``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (FALSE, TRUE, And, CntAgg, Const, Eq, Exists, Mul, Not, Or,
                     Pred, Query, Signature, Term, Var)

KEYWORDS = {"FALSE", "TRUE", "NOT", "AND", "OR", "EXISTS", "FORALL", "CNT", "OVER"}

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<arrow>->)
      | (?P<int>-?\d+)
      | (?P<str>'(?:[^'\\]|\\.)*')
      | (?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)
      | (?P<punct>[(),.=*])
    )""",
    re.VERBOSE,
)


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        val = m.group(kind)
        start = m.start(kind)
        if kind == "ident" and val in KEYWORDS:
            kind = "kw"
        toks.append(_Tok(kind, val, start))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class _Parser:
    def __init__(self, text: str, sig: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok.text == text and tok.kind in ("kw", "punct", "arrow"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            tok = self.peek()
            raise QuerySyntaxError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)

    def ident(self) -> str:
        tok = self.next()
        if tok.kind != "ident":
            raise QuerySyntaxError(f"expected identifier, found {tok.text or 'end of input'!r}", tok.pos)
        return tok.text

    def parse(self) -> Query:
        q = self.implication()
        tok = self.peek()
        if tok.kind != "eof":
            raise QuerySyntaxError(f"unexpected {tok.text!r}", tok.pos)
        return q

    def implication(self) -> Query:
        lhs = self.disjunction()
        if self.accept("->"):
            return Or(Not(lhs), self.implication())
        return lhs

    def disjunction(self) -> Query:
        q = self.conjunction()
        while self.accept("OR"):
            q = Or(q, self.conjunction())
        return q

    def conjunction(self) -> Query:
        q = self.unary()
        while self.accept("AND"):
            q = And(q, self.unary())
        return q

    def unary(self) -> Query:
        if self.accept("NOT"):
            return Not(self.unary())
        tok = self.peek()
        if tok.kind == "kw" and tok.text in ("EXISTS", "FORALL"):
            self.next()
            vs = self.var_list()
            self.expect(".")
            body = self.implication()
            if tok.text == "FORALL":
                body = Not(body)
            for v in reversed(vs):
                body = Exists(v, body)
            return Not(body) if tok.text == "FORALL" else body
        if self.accept("CNT"):
            c = self.ident()
            self.expect("OVER")
            vs = self.var_list()
            self.expect(".")
            return CntAgg(c, tuple(vs), self.implication())
        return self.primary()

    def var_list(self) -> list[str]:
        vs = [self.ident()]
        while self.accept(","):
            vs.append(self.ident())
        return vs

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "ident":
            return Var(tok.text)
        if tok.kind == "int":
            return Const(int(tok.text))
        if tok.kind == "str":
            return Const(_unquote(tok.text))
        raise QuerySyntaxError(f"expected term, found {tok.text or 'end of input'!r}", tok.pos)

    def primary(self) -> Query:
        if self.accept("FALSE"):
            return FALSE
        if self.accept("TRUE"):
            return TRUE
        if self.accept("("):
            q = self.implication()
            self.expect(")")
            return q
        tok = self.peek()
        name = self.ident()
        if self.accept("="):
            rhs = self.term()
            if isinstance(rhs, Var) and self.accept("*"):
                return Mul(name, rhs.name, self.ident())
            return Eq(name, rhs)
        if self.accept("("):
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            if self.sig is not None and self.sig.arities is not None:
                k = self.sig.arity(name)
                if k is None:
                    raise QuerySyntaxError(f"unknown predicate {name!r}", tok.pos)
                if k != len(args):
                    raise QuerySyntaxError(
                        f"predicate {name!r} expects {k} arguments, got {len(args)}", tok.pos)
            return Pred(name, tuple(args))
        raise QuerySyntaxError(f"expected '=' or '(' after {name!r}", self.peek().pos)


def parse_query(text: str, sig: Signature | None = None) -> Query:
    """Parse ``text``; when ``sig`` carries arities, predicate arities are checked."""
    return _Parser(text, sig).parse()
