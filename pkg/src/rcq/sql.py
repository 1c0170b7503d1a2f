"""SQL text for relational algebra expressions.

Each distinct subexpression becomes one common table expression, so a
subexpression used twice is computed once.  Anti-joins become a
``LEFT JOIN`` followed by a null check on a join column.

Stored relation ``r`` of arity ``k`` is a table ``r`` with columns
``x1 .. xk``.  The auxiliary relation is the table ``rcq_aux(x1)`` holding
one row.  Subexpressions are named ``rcq_s0``, ``rcq_s1`` and so on, so
relation names starting with ``rcq_`` are reserved.

Dialects differ only in identifier quoting and in how constants are
written: ``sqlite`` keeps integers as integers, ``postgresql`` and ``mysql``
store text columns unless ``int_columns`` is set.
"""

from __future__ import annotations

from .ra import (AUX_TABLE, AntiJoin, Arith, AuxA, Count, Diff, DupCol,
                 Empty, Join, Project, RAExpr, RATranslation, Rel, Select, Union,
                 ranf2ra)
from .syntax import Atom, Const, Query

__all__ = ["DIALECTS", "ra2sql", "ranf2sql", "literal", "quote"]

DIALECTS = ("postgresql", "mysql", "sqlite")


def quote(name: str, dialect: str) -> str:
    if dialect == "mysql":
        return "`" + name.replace("`", "``") + "`"
    return '"' + name.replace('"', '""') + '"'


def literal(value: Atom, dialect: str, int_columns: bool = False) -> str:
    """SQL literal for an atom stored in a relation column."""
    if isinstance(value, int) and (dialect == "sqlite" or int_columns):
        return str(value)
    text = str(value).replace("'", "''")
    return f"'{text}'"


class _Emitter:
    def __init__(self, dialect: str, int_columns: bool):
        if dialect not in DIALECTS:
            raise ValueError(f"unknown dialect {dialect!r}")
        self.dialect = dialect
        self.int_columns = int_columns
        self.names: dict[RAExpr, str] = {}
        self.ctes: list[str] = []

    def q(self, name: str) -> str:
        return quote(name, self.dialect)

    def lit(self, value: Atom) -> str:
        return literal(value, self.dialect, self.int_columns)

    def cols(self, alias: str, cols) -> str:
        return ", ".join(f"{alias}.{self.q(c)}" for c in cols)

    def name(self, e: RAExpr) -> str:
        got = self.names.get(e)
        if got is None:
            body = self.body(e)
            got = f"rcq_s{len(self.ctes)}"
            self.ctes.append(f"{got} AS ({body})")
            self.names[e] = got
        return got

    def body(self, e: RAExpr) -> str:
        q = self.q
        match e:
            case Rel(name, cols):
                sel = ", ".join(f"{q('x' + str(i + 1))} AS {q(c)}" for i, c in enumerate(cols))
                return f"SELECT DISTINCT {sel} FROM {q(name)}"
            case AuxA(col, value):
                src = q("x1") if value is None else self.lit(value)
                return f"SELECT {src} AS {q(col)} FROM {q(AUX_TABLE)}"
            case Empty(cols):
                sel = ", ".join(f"{q('x1')} AS {q(c)}" for c in cols)
                return f"SELECT {sel} FROM {q(AUX_TABLE)} WHERE 1 = 0"
            case Project(inner, cols):
                src = self.name(inner)
                return f"SELECT DISTINCT {self.cols('s', cols)} FROM {src} s"
            case DupCol(inner, src_col, dst):
                src = self.name(inner)
                return f"SELECT {self.cols('s', inner.columns)}, s.{q(src_col)} AS {q(dst)} FROM {src} s"
            case Select(inner, left, op, right):
                src = self.name(inner)
                rhs = self.lit(right.value) if isinstance(right, Const) else f"s.{q(right)}"
                sql_op = "=" if op == "=" else "<>"
                return f"SELECT {self.cols('s', inner.columns)} FROM {src} s WHERE s.{q(left)} {sql_op} {rhs}"
            case Arith(inner, res, left, right):
                src = self.name(inner)
                return (f"SELECT {self.cols('s', inner.columns)}, s.{q(left)} * s.{q(right)} AS {q(res)} "
                        f"FROM {src} s")
            case Union(a, b):
                return (f"SELECT {self.cols('l', a.columns)} FROM {self.name(a)} l UNION "
                        f"SELECT {self.cols('r', a.columns)} FROM {self.name(b)} r")
            case Join(a, b):
                shared = [c for c in b.columns if c in a.columns]
                extra = [c for c in b.columns if c not in a.columns]
                sel = self.cols("l", a.columns) + ("" if not extra else ", " + self.cols("r", extra))
                if shared:
                    on = " AND ".join(f"l.{q(c)} = r.{q(c)}" for c in shared)
                    return f"SELECT {sel} FROM {self.name(a)} l JOIN {self.name(b)} r ON {on}"
                return f"SELECT {sel} FROM {self.name(a)} l CROSS JOIN {self.name(b)} r"
            case AntiJoin(a, b) | Diff(a, b):
                on = " AND ".join(f"l.{q(c)} = r.{q(c)}" for c in b.columns)
                return (f"SELECT {self.cols('l', a.columns)} FROM {self.name(a)} l "
                        f"LEFT JOIN {self.name(b)} r ON {on} WHERE r.{q(b.columns[0])} IS NULL")
            case Count(inner, group, res):
                src = self.name(inner)
                if not group:
                    return f"SELECT COUNT(*) AS {q(res)} FROM {src} s"
                g = self.cols("s", group)
                return f"SELECT {g}, COUNT(*) AS {q(res)} FROM {src} s GROUP BY {g}"
        raise TypeError(f"unknown expression {e!r}")


def ra2sql(e: RAExpr | RATranslation, dialect: str = "postgresql", int_columns: bool = False,
           order: bool = True) -> str:
    """One SQL statement computing ``e``.

    With ``order`` the rows come sorted by all columns.
    """
    out_cols = None
    if isinstance(e, RATranslation):
        out_cols = e.free if e.aux is None else (e.aux,)
        e = e.expr
    em = _Emitter(dialect, int_columns)
    top = em.name(e)
    cols = out_cols or e.columns
    sel = ", ".join(em.q(c) for c in cols)
    text = "WITH " + ",\n".join(em.ctes) + f"\nSELECT {sel} FROM {top}"
    if order:
        text += " ORDER BY " + sel
    return text + ";"


def ranf2sql(q: Query, dialect: str = "postgresql", int_columns: bool = False, order: bool = True) -> str:
    """SQL for the RANF query ``q``; a closed query yields at most one row."""
    return ra2sql(ranf2ra(q), dialect, int_columns, order)
