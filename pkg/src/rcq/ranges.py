"""Range restriction analysis.

Two derivation systems decide whether a variable's values are confined to
the active domain:

* :func:`gen` enumerates the *generated* sets.  Each one is a set of
  quantified predicates such that every satisfying assignment satisfies
  one of them.
* :func:`cov` enumerates *cover* sets.  A cover set holds quantified
  predicates and equalities ``x = y``.  Outside of them the covered variable
  can be replaced by FALSE without changing the query's truth value.

Both relations are nondeterministic.  The functions return every
derivable set, deduplicated and capped at :data:`MAX_SETS`, in rule order.

The module also holds the Van Gelder--Topor variants (:func:`vgt_gen`,
:func:`vgt_con`), the query classifiers built on all of these, and two
diagnostics (:func:`closeatomseq`, :func:`closeatoms`).  The diagnostics
collect the quantified predicates that may show up in a translation.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Iterable

from .syntax import (And, Bot, CntAgg, Eq, Exists, Mul, Not, Or, Pred, Query,
                     Top, Var, exists_smart, fv, is_atomic_pred,
                     is_quantified_pred, query_key, subqueries, subst_bot,
                     subst_var)

MAX_SETS = 512

CoverSet = frozenset  # of Query

__all__ = [
    "MAX_SETS", "CoverSet", "gen", "cov", "gen_holds", "nongens",
    "is_safe_range", "is_ranf", "qps", "qps_query", "eqs", "vgt_gen",
    "vgt_con", "is_evaluable", "is_allowed", "closeatomseq", "closeatoms",
    "atomic_preds", "alpha_key", "NotCoverable",
]


class NotCoverable(ValueError):
    """No cover set can be derived (the bound variables are not range restricted)."""


def _dedup(sets: Iterable[frozenset]) -> tuple[frozenset, ...]:
    out = dict.fromkeys(sets)
    return tuple(out)[:MAX_SETS]


def _unions(a: tuple[frozenset, ...], b: tuple[frozenset, ...]) -> tuple[frozenset, ...]:
    return _dedup(g1 | g2 for g1, g2 in product(a, b))


def _eq(x: str, y: str) -> Eq:
    return Eq(x, Var(y))


# ---------------------------------------------------------------- generated


@lru_cache(maxsize=200_000)
def gen(x: str, q: Query) -> tuple[frozenset, ...]:
    """All ``G`` with ``x`` generated in ``q`` by ``G``; empty when ``x`` is not range restricted."""
    match q:
        case Bot():
            return (frozenset(),)
        case _ if is_atomic_pred(q):
            return (frozenset({q}),) if x in fv(q) else ()
        case Not(Not(a)):
            return gen(x, a)
        case Not(Or(a, b)):
            return gen(x, And(Not(a), Not(b)))
        case Not(And(a, b)):
            return gen(x, Or(Not(a), Not(b)))
        case Or(a, b):
            return _unions(gen(x, a), gen(x, b))
        case And(a, b):
            out = list(gen(x, a)) + list(gen(x, b))
            if isinstance(b, Eq) and isinstance(b.rhs, Var):
                y = None
                if b.lhs == x:
                    y = b.rhs.name
                elif b.rhs.name == x:
                    y = b.lhs
                if y is not None:
                    out += [frozenset(subst_var(g, y, x) for g in G) for G in gen(y, a)]
            return _dedup(out)
        case Exists(y, body) if y != x:
            return _dedup(frozenset(exists_smart(y, g) for g in G) for G in gen(x, body))
    return ()


def gen_holds(x: str, q: Query) -> bool:
    return bool(gen(x, q))


def nongens(q: Query) -> frozenset[str]:
    """Free variables of ``q`` that are not range restricted."""
    return frozenset(x for x in fv(q) if not gen(x, q))


@lru_cache(maxsize=100_000)
def _bound_restricted(q: Query) -> bool:
    for sub in subqueries(q):
        if isinstance(sub, Exists) and not gen(sub.var, sub.body):
            return False
    return True


def has_restricted_bound_vars(q: Query) -> bool:
    return _bound_restricted(q)


def is_safe_range(q: Query) -> bool:
    return not nongens(q) and _bound_restricted(q)


# ---------------------------------------------------------------- covered


@lru_cache(maxsize=200_000)
def _cov(x: str, q: Query) -> tuple[frozenset, ...]:
    if x not in fv(q):
        return (frozenset(),)
    match q:
        case Eq(lhs, Var(rhs)):
            if lhs == rhs:
                return (frozenset(),)
            return (frozenset({_eq(x, rhs if lhs == x else lhs)}),)
        case _ if is_atomic_pred(q):
            return (frozenset({q}),)
        case Not(a):
            return _cov(x, a)
        case Or(a, b) | And(a, b):
            unit = Top() if isinstance(q, Or) else Bot()
            ga, gb = _cov(x, a), _cov(x, b)
            out = list(_unions(ga, gb))
            if subst_bot(a, x) == unit:
                out += ga
            if subst_bot(b, x) == unit:
                out += gb
            return _dedup(out)
        case Exists(y, body):
            inner = _cov(x, body)
            out = [frozenset(exists_smart(y, g) for g in G) for G in inner if _eq(x, y) not in G]
            gy = gen(y, body)
            for G in inner:
                for Gy in gy:
                    out.append(frozenset(exists_smart(y, g) for g in G - {_eq(x, y)})
                               | frozenset(subst_var(g, y, x) for g in Gy))
            return _dedup(out)
    return ()


def cov(x: str, q: Query) -> tuple[frozenset, ...]:
    """All cover sets of ``x`` in ``q``, in rule order.

    Raises :class:`NotCoverable` when nothing is derivable, which only happens
    when the bound variables of ``q`` are not range restricted.
    """
    res = _cov(x, q)
    if not res:
        raise NotCoverable(f"no cover set for {x} in {q}")
    return res


def qps(G: Iterable[Query]) -> list[Query]:
    """The quantified predicates of a cover set, in canonical order."""
    return sorted((g for g in G if is_quantified_pred(g)), key=query_key)


def qps_query(G: Iterable[Query]) -> Query:
    from .syntax import disj

    return disj(qps(G))


def eqs(x: str, G: Iterable[Query]) -> list[str]:
    """Variables ``y`` other than ``x`` with ``x = y`` in ``G``, sorted."""
    return sorted({g.rhs.name for g in G
                   if isinstance(g, Eq) and isinstance(g.rhs, Var) and g.lhs == x and g.rhs.name != x})


# ---------------------------------------------------------------- RANF


@lru_cache(maxsize=200_000)
def is_ranf(q: Query) -> bool:
    """Whether ``q`` is in relational algebra normal form."""
    match q:
        case Bot() | Top():
            return True
        case _ if is_atomic_pred(q):
            return True
        case Not(a):
            return not fv(a) and is_ranf(a)
        case Or(a, b):
            return fv(a) == fv(b) and is_ranf(a) and is_ranf(b)
        case And(a, b):
            if not is_ranf(a):
                return False
            if is_ranf(b):
                return True
            match b:
                case Not(Eq(u, Var(v))):
                    if {u, v} <= fv(a):
                        return True
                case Not(c):
                    if fv(c) <= fv(a) and is_ranf(c):
                        return True
                case Eq(u, Var(v)):
                    return bool({u, v} & fv(a))
                case Mul(_, l, r):
                    return {l, r} <= fv(a)
            return False
        case Exists(v, body):
            return v in fv(body) and is_ranf(body)
        case CntAgg(c, bound, body):
            return set(bound) <= fv(body) and c not in fv(body) and is_ranf(body)
    return False


# ---------------------------------------------------------------- Van Gelder--Topor


@lru_cache(maxsize=100_000)
def vgt_gen(x: str, q: Query) -> tuple[frozenset, ...]:
    """Sets of atomic predicates generating ``x``."""
    match q:
        case _ if is_atomic_pred(q):
            return (frozenset({q}),) if x in fv(q) else ()
        case Not(Not(a)):
            return vgt_gen(x, a)
        case Not(Or(a, b)):
            return vgt_gen(x, And(Not(a), Not(b)))
        case Not(And(a, b)):
            return vgt_gen(x, Or(Not(a), Not(b)))
        case Not(Exists(y, body)) if y != x:
            return vgt_gen(x, Not(body))
        case Or(a, b):
            return _unions(vgt_gen(x, a), vgt_gen(x, b))
        case And(a, b):
            return _dedup(vgt_gen(x, a) + vgt_gen(x, b))
        case Exists(y, body) if y != x:
            return vgt_gen(x, body)
    return ()


@lru_cache(maxsize=100_000)
def vgt_con(x: str, q: Query) -> tuple[frozenset, ...]:
    """Sets of atomic predicates constraining ``x``."""
    if x not in fv(q):
        return (frozenset(),)
    match q:
        case _ if is_atomic_pred(q):
            return (frozenset({q}),)
        case Not(Not(a)):
            return vgt_con(x, a)
        case Not(Or(a, b)):
            return vgt_con(x, And(Not(a), Not(b)))
        case Not(And(a, b)):
            return vgt_con(x, Or(Not(a), Not(b)))
        case Not(Exists(y, body)) if y != x:
            return vgt_con(x, Not(body))
        case Or(a, b):
            return _unions(vgt_con(x, a), vgt_con(x, b))
        case And(a, b):
            return _dedup(vgt_gen(x, a) + vgt_gen(x, b) + _unions(vgt_con(x, a), vgt_con(x, b)))
        case Exists(y, body) if y != x:
            return vgt_con(x, body)
    return ()


def is_evaluable(q: Query) -> bool:
    if any(not vgt_gen(x, q) for x in fv(q)):
        return False
    return all(vgt_con(s.var, s.body) for s in subqueries(q) if isinstance(s, Exists))


def is_allowed(q: Query) -> bool:
    if any(not vgt_gen(x, q) for x in fv(q)):
        return False
    return all(vgt_gen(s.var, s.body) for s in subqueries(q) if isinstance(s, Exists))


# ---------------------------------------------------------------- quantified predicate closures


def atomic_preds(q: Query) -> set[Query]:
    return {s for s in subqueries(q) if is_atomic_pred(s)}


def _binder_ancestors(q: Query) -> dict[str, set[str]]:
    """For each bound variable, the bound variables whose binder encloses (or is) its binder."""
    out: dict[str, set[str]] = {}

    def walk(node: Query, enclosing: tuple[str, ...]):
        match node:
            case Exists(v, body):
                chain = enclosing + (v,)
                out.setdefault(v, set()).update(chain)
                walk(body, chain)
            case CntAgg(_, bound, body):
                chain = enclosing + tuple(bound)
                for v in bound:
                    out.setdefault(v, set()).update(chain)
                walk(body, chain)
            case Not(a):
                walk(a, enclosing)
            case And(a, b) | Or(a, b):
                walk(a, enclosing)
                walk(b, enclosing)

    walk(q, ())
    return out


def _eq_closure(q: Query) -> set[tuple[str, str]]:
    edges = set()
    for s in subqueries(q):
        if isinstance(s, Eq) and isinstance(s.rhs, Var):
            edges.add((s.lhs, s.rhs.name))
            edges.add((s.rhs.name, s.lhs))
    closure = set(edges)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(closure):
            for (c, d) in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return closure


def closeatomseq(q: Query) -> set[Query]:
    """Quantified predicates derivable from the atoms of ``q``.

    Starts from the atomic predicates, then closes under substitution along
    equalities of ``q`` and under quantifying the innermost bound variable.
    ``q`` should use pairwise distinct free and bound variables.
    """
    free = fv(q)
    anc = _binder_ancestors(q)

    def le(x: str, y: str) -> bool:
        return y in free or y in anc.get(x, ())

    teqs = _eq_closure(q)
    result = set(atomic_preds(q))
    todo = list(result)
    while todo:
        cur = todo.pop()
        new = []
        for (x, y) in teqs:
            if x != y and x in fv(cur) and le(x, y):
                new.append(subst_var(cur, x, y))
        for x in fv(cur) - free:
            if all(le(x, y) for y in fv(cur)):
                new.append(Exists(x, cur))
        for n in new:
            if n not in result:
                result.add(n)
                todo.append(n)
    return result


def _bsets(ap: Query, q: Query) -> set[tuple[str, ...]]:
    """Sequences of variables bound (within ``q``) at each occurrence of ``ap``."""
    out = set()
    names = fv(ap)

    def walk(node: Query, binders: tuple[str, ...]):
        if node == ap:
            seq = []
            for i, v in enumerate(binders):
                if v in names and v not in binders[i + 1:]:
                    seq.append(v)
            out.add(tuple(seq))
            return
        match node:
            case Exists(v, body):
                walk(body, binders + (v,))
            case CntAgg(_, bound, body):
                walk(body, binders + tuple(bound))
            case Not(a):
                walk(a, binders)
            case And(a, b) | Or(a, b):
                walk(a, binders)
                walk(b, binders)

    walk(q, ())
    return out


def closeatoms(q: Query) -> set[Query]:
    """Quantified predicates obtained by binding, in some subquery, the variables bound around an atom."""
    result = set()
    for sub in set(subqueries(q)):
        for ap in atomic_preds(sub):
            for seq in _bsets(ap, sub):
                qp = ap
                for v in reversed(seq):
                    qp = Exists(v, qp)
                result.add(qp)
    return result


def alpha_key(qp: Query) -> tuple:
    """Key identifying a quantified predicate up to renaming of its bound variables."""
    bound = []
    while isinstance(qp, Exists):
        bound.append(qp.var)
        qp = qp.body
    match qp:
        case Pred(name, args):
            ids: dict[str, int] = {}
            terms = tuple(("b", ids.setdefault(t.name, len(ids))) if isinstance(t, Var) and t.name in bound
                          else ("v", t.name) if isinstance(t, Var) else ("c", repr(t.value))
                          for t in args)
            return ("pred", name, terms)
        case Eq(lhs, rhs):
            return ("eq", "b" if lhs in bound else lhs, str(rhs))
    return ("other", str(qp))
