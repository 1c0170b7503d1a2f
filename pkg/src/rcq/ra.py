"""Relational algebra expressions and the lowering of RANF queries into them.

Every expression has named columns.  A query with free variables lowers to
an expression over exactly those variables.  SQL has no 0-ary relations, so
a closed query lowers to an expression over one auxiliary column instead.
That expression holds the single row of the auxiliary relation ``A`` when
the query is true and no row otherwise.  ``A`` also supplies constants:
``x = 7`` lowers to the one row of ``A`` relabelled as ``7``.

The text form (:func:`to_sexpr`) prints the constructor tree as
s-expressions, for example ``(antijoin (rel B b) (project (rel P b p) b))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .ranges import is_ranf
from .relation import Relation
from .semantics import Structure
from .syntax import (Atom, Bot, CntAgg, Const, Eq, Exists, Mul, Not, Or, And,
                     Pred, Query, Top, Var, av, fresh_var, fv, fvseq)

__all__ = [
    "RAExpr", "Rel", "AuxA", "Empty", "Project", "DupCol", "Select", "Arith",
    "Union", "Diff", "Join", "AntiJoin", "Count", "ranf2ra", "eval_ra",
    "to_sexpr", "AUX_TABLE", "AUX_VALUE", "RATranslation",
]

AUX_TABLE = "rcq_aux"
AUX_VALUE = "0"


class RAExpr:
    """Base class; every subclass exposes ``columns``."""

    columns: tuple[str, ...]


@dataclass(frozen=True)
class Rel(RAExpr):
    """Stored relation ``name`` with its positions labelled ``columns``."""

    name: str
    columns: tuple[str, ...]


@dataclass(frozen=True)
class AuxA(RAExpr):
    """The one-row auxiliary relation, optionally relabelled as the constant ``value``."""

    column: str
    value: Atom | None = None

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.column,)


@dataclass(frozen=True)
class Empty(RAExpr):
    columns: tuple[str, ...]


@dataclass(frozen=True)
class Project(RAExpr):
    expr: RAExpr
    columns: tuple[str, ...]


@dataclass(frozen=True)
class DupCol(RAExpr):
    """Copy of column ``src`` under the new name ``dst``."""

    expr: RAExpr
    src: str
    dst: str

    @property
    def columns(self) -> tuple[str, ...]:
        return self.expr.columns + (self.dst,)


@dataclass(frozen=True)
class Select(RAExpr):
    """Rows where ``left op right``; ``right`` is a column name or a :class:`Const`."""

    expr: RAExpr
    left: str
    op: str
    right: Union[str, Const]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.expr.columns


@dataclass(frozen=True)
class Arith(RAExpr):
    """Adds column ``result`` holding ``left * right``."""

    expr: RAExpr
    result: str
    left: str
    right: str

    @property
    def columns(self) -> tuple[str, ...]:
        return self.expr.columns + (self.result,)


@dataclass(frozen=True)
class Union(RAExpr):
    a: RAExpr
    b: RAExpr

    @property
    def columns(self) -> tuple[str, ...]:
        return self.a.columns


@dataclass(frozen=True)
class Diff(RAExpr):
    a: RAExpr
    b: RAExpr

    @property
    def columns(self) -> tuple[str, ...]:
        return self.a.columns


@dataclass(frozen=True)
class Join(RAExpr):
    """Natural join; columns of ``a`` first."""

    a: RAExpr
    b: RAExpr

    @property
    def columns(self) -> tuple[str, ...]:
        return self.a.columns + tuple(c for c in self.b.columns if c not in self.a.columns)


@dataclass(frozen=True)
class AntiJoin(RAExpr):
    """Rows of ``a`` that agree with no row of ``b`` on the columns of ``b``."""

    a: RAExpr
    b: RAExpr

    @property
    def columns(self) -> tuple[str, ...]:
        return self.a.columns


@dataclass(frozen=True)
class Count(RAExpr):
    expr: RAExpr
    group: tuple[str, ...]
    result: str

    @property
    def columns(self) -> tuple[str, ...]:
        return self.group + (self.result,)


def _check(e: RAExpr) -> RAExpr:
    match e:
        case Union(a, b) | Diff(a, b):
            if set(a.columns) != set(b.columns) or a.columns != b.columns:
                raise ValueError(f"operands are not union compatible: {a.columns} vs {b.columns}")
        case AntiJoin(a, b):
            if not set(b.columns) <= set(a.columns):
                raise ValueError(f"anti-join columns {b.columns} not within {a.columns}")
        case Project(inner, cols):
            if not set(cols) <= set(inner.columns):
                raise ValueError(f"projection on unknown columns {cols}")
    return e


# ---------------------------------------------------------------- lowering


@dataclass(frozen=True)
class RATranslation:
    """Lowered expression; ``aux`` names the truth column of a closed query."""

    expr: RAExpr
    free: tuple[str, ...]
    aux: str | None


class _Lower:
    def __init__(self, q: Query):
        self.avoid = set(av(q)) | set(_all_vars(q))
        self.aux = self.fresh("t")
        self.counter = 0

    def fresh(self, base: str) -> str:
        name = base if base not in self.avoid else fresh_var(base, self.avoid)
        self.avoid.add(name)
        return name

    def position(self) -> str:
        self.counter += 1
        return self.fresh(f"p{self.counter}")

    def cols(self, q: Query) -> tuple[str, ...]:
        return fvseq(q) if fv(q) else (self.aux,)

    def fit(self, e: RAExpr, q: Query) -> RAExpr:
        """Project ``e`` onto the columns that represent ``q``."""
        want = self.cols(q)
        if e.columns == want:
            return e
        if not fv(q) and self.aux not in e.columns:
            e = Join(AuxA(self.aux), e)
        return _check(Project(e, want))

    def lower(self, q: Query) -> RAExpr:
        match q:
            case Bot():
                return Empty((self.aux,))
            case Top():
                return AuxA(self.aux)
            case Eq(x, Const(v)):
                return AuxA(x, v)
            case Pred(name, args):
                return self.fit(self.pred(name, args), q)
            case Not(a):
                return Diff(AuxA(self.aux), self.fit(self.lower(a), a))
            case Or(a, b):
                left = self.fit(self.lower(a), q)
                right = self.fit(self.lower(b), q)
                if right.columns != left.columns:
                    right = Project(right, left.columns)
                return _check(Union(left, right))
            case And(a, b):
                return self.fit(self.conj(a, b), q)
            case Exists():
                vs = []
                body = q
                while isinstance(body, Exists):
                    vs.append(body.var)
                    body = body.body
                inner = self.lower(body)
                return self.fit(inner, q)
            case CntAgg(c, bound, body):
                inner = self.lower(body)
                group = tuple(v for v in fvseq(body) if v not in bound)
                return self.fit(Count(inner, group, c), q)
        raise ValueError(f"cannot lower {q}")

    def pred(self, name: str, args) -> RAExpr:
        labels = []
        seen: dict[str, str] = {}
        checks = []
        for t in args:
            if isinstance(t, Var) and t.name not in seen:
                seen[t.name] = t.name
                labels.append(t.name)
            else:
                label = self.position()
                labels.append(label)
                checks.append((label, t.name if isinstance(t, Var) else t))
        e: RAExpr = Rel(name, tuple(labels))
        for label, other in checks:
            e = Select(e, label, "=", other)
        return e

    def conj(self, a: Query, b: Query) -> RAExpr:
        left = self.lower(a)
        match b:
            case Eq(u, Var(v)) if u in fv(a) and v in fv(a):
                return Select(left, u, "=", v)
            case Eq(u, Var(v)) if u in fv(a):
                return DupCol(left, u, v)
            case Eq(u, Var(v)) if v in fv(a):
                return DupCol(left, v, u)
            case Not(Eq(u, Var(v))) if {u, v} <= fv(a):
                return Select(left, u, "!=", v)
            case Mul(c, x, y):
                if c in fv(a):
                    tmp = self.fresh("m")
                    return Project(Select(Arith(left, tmp, x, y), c, "=", tmp), left.columns)
                return Arith(left, c, x, y)
            case Not(c) if fv(c) <= fv(a) and (fv(c) or not fv(a)) and is_ranf(c):
                return _check(AntiJoin(left, self.fit(self.lower(c), c)))
            case Not(c) if not fv(c) and is_ranf(c):
                # Closed negation next to free variables: join with its truth value.
                truth = Diff(AuxA(self.aux), self.fit(self.lower(c), c))
                return Join(left, truth)
        right = self.lower(b)
        return Join(left, right)


def _all_vars(q: Query) -> set[str]:
    out = set(fv(q))
    match q:
        case Not(a):
            out |= _all_vars(a)
        case And(a, b) | Or(a, b):
            out |= _all_vars(a) | _all_vars(b)
        case Exists(v, body):
            out |= {v} | _all_vars(body)
        case CntAgg(c, bound, body):
            out |= {c, *bound} | _all_vars(body)
    return out


def ranf2ra(q: Query) -> RATranslation:
    """Relational algebra expression computing the answers of the RANF query ``q``."""
    if not is_ranf(q):
        raise ValueError(f"not in relational algebra normal form: {q}")
    low = _Lower(q)
    expr = low.fit(low.lower(q), q)
    return RATranslation(expr, fvseq(q), None if fv(q) else low.aux)


# ---------------------------------------------------------------- evaluation


def eval_ra(e: RAExpr | RATranslation, s: Structure) -> Relation:
    """Evaluate ``e`` on ``s``.

    For a :class:`RATranslation` the result is over the query's free
    variables; the auxiliary column of a closed query is dropped.
    """
    if isinstance(e, RATranslation):
        rel = _Eval(s).eval(e.expr)
        if e.aux is not None:
            return Relation.unit() if rel else Relation.empty()
        return rel.reorder(e.free)
    return _Eval(s).eval(e)


class _Eval:
    def __init__(self, s: Structure):
        self.s = s
        self.memo: dict[RAExpr, Relation] = {}

    def eval(self, e: RAExpr) -> Relation:
        res = self.memo.get(e)
        if res is None:
            res = self._eval(e)
            self.memo[e] = res
        return res

    def _eval(self, e: RAExpr) -> Relation:
        match e:
            case Rel(name, cols):
                if name not in self.s.interps:
                    raise KeyError(f"relation {name} is missing")
                return Relation.make(cols, self.s.table(name, len(cols)))
            case AuxA(col, value):
                return Relation.make((col,), [(AUX_VALUE if value is None else value,)])
            case Empty(cols):
                return Relation.empty(cols)
            case Project(inner, cols):
                return self.eval(inner).project(cols)
            case DupCol(inner, src, dst):
                return self.eval(inner).duplicate(src, dst)
            case Select(inner, left, op, right):
                rel = self.eval(inner)
                if isinstance(right, Const):
                    res = rel.select_const(left, right.value)
                    return res if op == "=" else rel.difference(res)
                return rel.select_eq(left, right) if op == "=" else rel.select_neq(left, right)
            case Arith(inner, res, left, right):
                rel = self.eval(inner)
                i, j = rel.columns.index(left), rel.columns.index(right)
                return Relation(rel.columns + (res,), frozenset(
                    r + (r[i] * r[j],) for r in rel.rows
                    if isinstance(r[i], int) and isinstance(r[j], int)))
            case Union(a, b):
                return self.eval(a).union(self.eval(b).reorder(a.columns))
            case Diff(a, b):
                return self.eval(a).difference(self.eval(b).reorder(a.columns))
            case Join(a, b):
                return self.eval(a).join(self.eval(b)).reorder(e.columns)
            case AntiJoin(a, b):
                return self.eval(a).antijoin(self.eval(b))
            case Count(inner, group, res):
                return self.eval(inner).count(group, res)
        raise TypeError(f"unknown expression {e!r}")


# ---------------------------------------------------------------- text form


def to_sexpr(e: RAExpr | RATranslation) -> str:
    """S-expression text of ``e``."""
    if isinstance(e, RATranslation):
        e = e.expr
    match e:
        case Rel(name, cols):
            return "(rel " + " ".join((name,) + cols) + ")"
        case AuxA(col, value):
            return f"(aux {col})" if value is None else f"(aux {col} {Const(value)})"
        case Empty(cols):
            return "(empty " + " ".join(cols) + ")"
        case Project(inner, cols):
            return f"(project {to_sexpr(inner)} {' '.join(cols)})"
        case DupCol(inner, src, dst):
            return f"(dup {to_sexpr(inner)} {src} {dst})"
        case Select(inner, left, op, right):
            return f"(select {to_sexpr(inner)} {left} {op} {right})"
        case Arith(inner, res, left, right):
            return f"(mul {to_sexpr(inner)} {res} {left} {right})"
        case Union(a, b):
            return f"(union {to_sexpr(a)} {to_sexpr(b)})"
        case Diff(a, b):
            return f"(diff {to_sexpr(a)} {to_sexpr(b)})"
        case Join(a, b):
            return f"(join {to_sexpr(a)} {to_sexpr(b)})"
        case AntiJoin(a, b):
            return f"(antijoin {to_sexpr(a)} {to_sexpr(b)})"
        case Count(inner, group, res):
            return f"(count {to_sexpr(inner)} ({' '.join(group)}) {res})"
    raise TypeError(f"unknown expression {e!r}")
