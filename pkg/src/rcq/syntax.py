"""Abstract syntax of relational calculus queries.

Queries are immutable trees built from the node classes below.  Besides the
node types, this module holds the syntactic toolbox used by every later
stage: free variables, capture-avoiding substitution, constant propagation,
flattening of associative connectives and a size measure used to argue that
rewrites terminate.

Atoms (the values a term can denote) are plain Python ``int`` or ``str``
objects.  Integers sort before text; see :func:`atom_key`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

Atom = Union[int, str]

__all__ = [
    "Atom", "Var", "Const", "Term", "Query",
    "Bot", "Top", "Eq", "Pred", "Not", "Or", "And", "Exists", "CntAgg", "Mul",
    "FALSE", "TRUE", "Signature",
    "atom_key", "fv", "av", "fvseq", "subqueries", "is_atomic_pred",
    "is_quantified_pred", "fresh_var", "cp", "subst_var", "subst_bot",
    "flat_or", "flat_and", "disj", "conj", "sz", "exists_smart",
    "exists_many", "subst_many", "query_key", "sorted_queries",
]

_IDENT = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*\Z")


def atom_key(a: Atom) -> tuple:
    """Sort key giving the total order on atoms (integers before text)."""
    if isinstance(a, bool):
        raise TypeError("booleans are not atoms")
    if isinstance(a, int):
        return (0, a, "")
    return (1, 0, a)


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __post_init__(self):
        if not _IDENT.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: Atom

    def __str__(self) -> str:
        if isinstance(self.value, int):
            return str(self.value)
        return "'" + self.value.replace("\\", "\\\\").replace("'", "\\'") + "'"


Term = Union[Var, Const]


# ---------------------------------------------------------------- queries


class Query:
    """Base class of all query nodes."""

    def __str__(self) -> str:
        from .printer import to_text

        return to_text(self)


def _cached_hash(self) -> int:
    # Queries are hashed constantly (memo tables, sets of disjuncts); the
    # generated dataclass hash would walk the whole tree every time.
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__, *(getattr(self, f) for f in self.__dataclass_fields__)))
        object.__setattr__(self, "_hash", h)
    return h


def _node(**kw):
    def wrap(cls):
        cls = dataclass(frozen=True, **kw)(cls)
        cls.__hash__ = _cached_hash
        return cls

    return wrap


@_node(repr=False)
class Bot(Query):
    def __repr__(self) -> str:
        return "FALSE"


@_node(repr=False)
class Top(Query):
    def __repr__(self) -> str:
        return "TRUE"


FALSE = Bot()
TRUE = Top()


@_node()
class Eq(Query):
    """Equality ``lhs = rhs`` between a variable and a term."""

    lhs: str
    rhs: Term


@_node()
class Pred(Query):
    name: str
    args: tuple[Term, ...]


@_node()
class Not(Query):
    q: Query


@_node()
class Or(Query):
    l: Query
    r: Query


@_node()
class And(Query):
    l: Query
    r: Query


@_node()
class Exists(Query):
    var: str
    body: Query


@_node()
class CntAgg(Query):
    """Count aggregation: ``result`` is the number of ``bound`` tuples satisfying ``body``.

    The remaining free variables of ``body`` act as group-by columns.
    """

    result: str
    bound: tuple[str, ...]
    body: Query

    def __post_init__(self):
        if len(set(self.bound)) != len(self.bound):
            raise ValueError("count aggregation binds a variable twice")
        if self.result in self.bound:
            raise ValueError("count result must differ from the counted variables")


@_node()
class Mul(Query):
    """Arithmetic constraint ``result = left * right`` over integer atoms.

    Only produced by the aggregation rewrites; never written by users.
    """

    result: str
    left: str
    right: str


@dataclass(frozen=True)
class Signature:
    """Constants and predicate arities a query may use."""

    constants: frozenset = frozenset()
    arities: dict = None

    def arity(self, name: str) -> int | None:
        return (self.arities or {}).get(name)


# ---------------------------------------------------------------- variables


def _term_vars(ts: Iterable[Term]) -> set[str]:
    return {t.name for t in ts if isinstance(t, Var)}


def fv(q: Query) -> frozenset[str]:
    """Free variables of ``q``."""
    return _fv(q)


_fv_cache: dict[Query, frozenset[str]] = {}


def _fv(q: Query) -> frozenset[str]:
    try:
        return _fv_cache[q]
    except KeyError:
        pass
    match q:
        case Bot() | Top():
            res = frozenset()
        case Eq(lhs, rhs):
            res = frozenset({lhs} | _term_vars([rhs]))
        case Pred(_, args):
            res = frozenset(_term_vars(args))
        case Not(a):
            res = _fv(a)
        case Or(a, b) | And(a, b):
            res = _fv(a) | _fv(b)
        case Exists(v, body):
            res = _fv(body) - {v}
        case CntAgg(c, bound, body):
            res = (_fv(body) - set(bound)) | {c}
        case Mul(c, a, b):
            res = frozenset({c, a, b})
        case _:
            raise TypeError(f"not a query: {q!r}")
    if len(_fv_cache) > 200_000:
        _fv_cache.clear()
    _fv_cache[q] = res
    return res


def av(q: Query) -> frozenset[str]:
    """All variables, free or bound, occurring in ``q``."""
    match q:
        case Exists(v, body):
            return av(body) | {v}
        case CntAgg(c, bound, body):
            return av(body) | set(bound) | {c}
        case Not(a):
            return av(a)
        case Or(a, b) | And(a, b):
            return av(a) | av(b)
        case _:
            return fv(q)


def fvseq(q: Query) -> tuple[str, ...]:
    """Free variables in the global (lexicographic) variable order."""
    return tuple(sorted(fv(q)))


def subqueries(q: Query) -> Iterator[Query]:
    """Pre-order traversal of every subquery, ``q`` included."""
    stack = [q]
    while stack:
        cur = stack.pop()
        yield cur
        match cur:
            case Not(a) | Exists(_, a) | CntAgg(_, _, a):
                stack.append(a)
            case Or(a, b) | And(a, b):
                stack.append(b)
                stack.append(a)


def is_atomic_pred(q: Query) -> bool:
    """True for ``r(t...)`` and ``x = c`` with a constant ``c``."""
    return isinstance(q, Pred) or (isinstance(q, Eq) and isinstance(q.rhs, Const))


def is_quantified_pred(q: Query) -> bool:
    while isinstance(q, Exists):
        q = q.body
    return is_atomic_pred(q)


def fresh_var(name: str, avoid: Iterable[str]) -> str:
    """``name`` with the lowest numeric suffix that is not in ``avoid``."""
    avoid = set(avoid)
    base = name.rstrip("0123456789") or name
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


# ---------------------------------------------------------------- constructors


def disj(qs: Iterable[Query]) -> Query:
    """Left-associated disjunction; the empty disjunction is FALSE."""
    res = None
    for q in qs:
        res = q if res is None else Or(res, q)
    return FALSE if res is None else res


def conj(qs: Iterable[Query]) -> Query:
    """Left-associated conjunction; the empty conjunction is TRUE."""
    res = None
    for q in qs:
        res = q if res is None else And(res, q)
    return TRUE if res is None else res


def exists_smart(x: str, q: Query) -> Query:
    return Exists(x, q) if x in fv(q) else q


def exists_many(xs: Iterable[str], q: Query) -> Query:
    """Existentially close ``q`` over ``xs``; the first variable is outermost."""
    for x in reversed(list(xs)):
        q = exists_smart(x, q)
    return q


def flat_or(q: Query) -> list[Query]:
    """Operands of nested disjunctions, in order and without duplicates."""
    return _dedup(_flat(q, Or))


def flat_and(q: Query) -> list[Query]:
    return _dedup(_flat(q, And))


def _flat(q: Query, op: type) -> Iterator[Query]:
    if isinstance(q, op):
        yield from _flat(q.l, op)
        yield from _flat(q.r, op)
    else:
        yield q


def _dedup(qs: Iterable[Query]) -> list[Query]:
    return list(dict.fromkeys(qs))


# ---------------------------------------------------------------- cp


def cp(q: Query) -> Query:
    """Exhaustive constant propagation.

    The result is FALSE, TRUE or free of FALSE/TRUE subqueries.
    """
    match q:
        case Eq(lhs, Var(rhs)) if lhs == rhs:
            return TRUE
        case Not(a):
            a = cp(a)
            if a == FALSE:
                return TRUE
            if a == TRUE:
                return FALSE
            return Not(a)
        case And(a, b):
            a, b = cp(a), cp(b)
            if a == FALSE or b == FALSE:
                return FALSE
            if a == TRUE:
                return b
            if b == TRUE:
                return a
            return And(a, b)
        case Or(a, b):
            a, b = cp(a), cp(b)
            if a == TRUE or b == TRUE:
                return TRUE
            if a == FALSE:
                return b
            if b == FALSE:
                return a
            return Or(a, b)
        case Exists(v, body):
            body = cp(body)
            if body in (FALSE, TRUE):
                return body
            return Exists(v, body)
        case CntAgg(c, bound, body):
            return CntAgg(c, bound, cp(body))
        case _:
            return q


# ---------------------------------------------------------------- substitution


def _rename_term(t: Term, x: str, y: str) -> Term:
    return Var(y) if isinstance(t, Var) and t.name == x else t


def _rename(q: Query, x: str, y: str) -> Query:
    """Replace free ``x`` by ``y`` without constant propagation."""
    if x == y or x not in fv(q):
        return q
    match q:
        case Eq(lhs, rhs):
            return Eq(y if lhs == x else lhs, _rename_term(rhs, x, y))
        case Pred(name, args):
            return Pred(name, tuple(_rename_term(t, x, y) for t in args))
        case Not(a):
            return Not(_rename(a, x, y))
        case And(a, b):
            return And(_rename(a, x, y), _rename(b, x, y))
        case Or(a, b):
            return Or(_rename(a, x, y), _rename(b, x, y))
        case Exists(v, body):
            if v == y:
                v2 = fresh_var(v, av(body) | {x, y})
                body = _rename(body, v, v2)
                v = v2
            return Exists(v, _rename(body, x, y))
        case CntAgg(c, bound, body):
            if y in bound:
                new_bound = []
                for b in bound:
                    if b == y:
                        b2 = fresh_var(b, av(body) | {x, y, c} | set(bound))
                        body = _rename(body, b, b2)
                        b = b2
                    new_bound.append(b)
                bound = tuple(new_bound)
            if c == x:
                if y in fv(body):
                    # y is a group-by column already; keep the count in a
                    # fresh variable and equate it with y.
                    c2 = fresh_var(c, av(body) | {x, y} | set(bound))
                    return Exists(c2, And(CntAgg(c2, bound, body), Eq(c2, Var(y))))
                return CntAgg(y, bound, body)
            return CntAgg(c, bound, _rename(body, x, y))
        case Mul(c, a, b):
            def r(v):
                return y if v == x else v
            return Mul(r(c), r(a), r(b))
    raise TypeError(f"not a query: {q!r}")


def subst_var(q: Query, x: str, y: str) -> Query:
    """``q[x -> y]``: rename free ``x`` to ``y`` avoiding capture, then :func:`cp`."""
    return cp(_rename(q, x, y))


def subst_many(q: Query, pairs: Iterable[tuple[str, str]]) -> Query:
    for x, y in pairs:
        q = subst_var(q, x, y)
    return q


def _bot(q: Query, x: str) -> Query:
    if x not in fv(q):
        return q
    match q:
        case Eq(lhs, Var(rhs)) if lhs == rhs:
            return TRUE
        case Eq() | Pred() | Mul():
            return FALSE
        case Not(a):
            return Not(_bot(a, x))
        case And(a, b):
            return And(_bot(a, x), _bot(b, x))
        case Or(a, b):
            return Or(_bot(a, x), _bot(b, x))
        case Exists(v, body):
            return Exists(v, _bot(body, x))
        case CntAgg(c, bound, body):
            if x == c:
                return q
            return CntAgg(c, bound, _bot(body, x))
    raise TypeError(f"not a query: {q!r}")


def subst_bot(q: Query, x: str) -> Query:
    """``q[x/FALSE]``: atoms mentioning free ``x`` become FALSE (``x = x`` becomes TRUE)."""
    return cp(_bot(q, x))


# ---------------------------------------------------------------- measures


def sz(q: Query) -> int:
    """Size measure that strictly decreases along the normalisation rewrites."""
    match q:
        case Not(a):
            return 2 * sz(a)
        case Or(a, b):
            return 2 * sz(a) + 2 * sz(b) + 2
        case And(a, b):
            return sz(a) + sz(b) + 1
        case Exists(_, body):
            return 2 * sz(body)
        case CntAgg(_, _, body):
            return 2 * sz(body) + 1
        case _:
            return 1


def query_key(q: Query) -> tuple:
    """Deterministic sort key: shorter canonical text first."""
    s = str(q)
    return (len(s), s)


def sorted_queries(qs: Iterable[Query]) -> list[Query]:
    return sorted(set(qs), key=query_key)
