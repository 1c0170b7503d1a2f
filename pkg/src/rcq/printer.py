"""Canonical text form of queries.

Every binary connective and every binder is wrapped in parentheses, so the
output never depends on precedence.  Runs of nested existentials are grouped
into a single ``EXISTS x, y.`` binder; the parser expands them back, which
makes ``parse_query(to_text(q)) == q`` hold for every query.
"""

from __future__ import annotations

from .syntax import (And, Bot, CntAgg, Eq, Exists, Mul, Not, Or, Pred, Query,
                     Top)


def to_text(q: Query) -> str:
    parts: list[str] = []
    _emit(q, parts)
    return "".join(parts)


def _emit(q: Query, out: list[str]) -> None:
    match q:
        case Bot():
            out.append("FALSE")
        case Top():
            out.append("TRUE")
        case Eq(lhs, rhs):
            out.append(f"{lhs} = {rhs}")
        case Pred(name, args):
            out.append(f"{name}({', '.join(map(str, args))})")
        case Mul(c, a, b):
            out.append(f"{c} = {a} * {b}")
        case Not(a):
            out.append("NOT ")
            _emit(a, out)
        case And(a, b) | Or(a, b):
            out.append("(")
            _emit(a, out)
            out.append(" AND " if isinstance(q, And) else " OR ")
            _emit(b, out)
            out.append(")")
        case Exists():
            vs = []
            while isinstance(q, Exists):
                vs.append(q.var)
                q = q.body
            out.append(f"(EXISTS {', '.join(vs)}. ")
            _emit(q, out)
            out.append(")")
        case CntAgg(c, bound, body):
            out.append(f"(CNT {c} OVER {', '.join(bound)}. ")
            _emit(body, out)
            out.append(")")
        case _:
            raise TypeError(f"not a query: {q!r}")
