"""Count aggregations for RANF queries.

A subquery ``EXISTS v. Qv AND NOT G1 AND ... AND NOT Gk`` asks whether some
``v`` satisfies ``Qv`` but none of the ``Gi``.  Equivalently, the number of
``v`` satisfying ``Qv`` differs from the number satisfying ``Qv`` and some
``Gi``.  :func:`apply_hash` and :func:`apply_hashhash` rewrite with counts
instead of the existential.  The rewrite pays off once :func:`mini_scope`
moves conjuncts that do not mention ``v`` out of the aggregations, which
removes the Cartesian product that ``Qv`` often is.

:func:`cnt` walks a query top-down.  At every site where a rewrite applies it
compares leaving the site alone, rewriting and rewriting with mini-scoping,
and keeps the cheapest on a training structure.

Mini-scoping a count aggregation is exact only while the aggregated body
keeps a group-by variable.  Otherwise, an empty group yields a zero count
where the original aggregation yields nothing.  The rewrites above compare
two counts whose groups are nested.  A spurious zero therefore only shows up
when the true count is zero as well, and the comparison comes out the same.
:func:`cnt` mini-scopes only the aggregations it introduced itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ranges import is_ranf
from .semantics import Structure, cost
from .syntax import (And, CntAgg, Eq, Exists, Mul, Not, Or, Query, Var, av,
                     conj, disj, exists_many, flat_and, flat_or, fresh_var, fv)

__all__ = ["NoMatch", "apply_hash", "apply_hashhash", "mini_scope", "cnt", "Counter"]


class NoMatch(ValueError):
    """The query does not have the shape a rewrite expects."""


@dataclass(frozen=True)
class _Site:
    """``EXISTS vs. qv AND NOT g1 AND ... AND NOT gk``."""

    vs: tuple[str, ...]
    qv: Query
    gammas: tuple[Query, ...]


def _site(q: Query) -> _Site:
    vs = []
    body = q
    while isinstance(body, Exists):
        vs.append(body.var)
        body = body.body
    gammas = []
    while isinstance(body, And) and isinstance(body.r, Not):
        gammas.insert(0, body.r.q)
        body = body.l
    if not vs or not gammas:
        raise NoMatch(f"not an existential over negated conjuncts: {q}")
    if len(set(vs)) != len(vs) or not is_ranf(q):
        raise NoMatch(f"not a RANF site: {q}")
    return _Site(tuple(vs), body, tuple(gammas))


def _fresh_pair(*qs: Query) -> tuple[str, str]:
    avoid = set()
    for q in qs:
        avoid |= av(q)
    c1 = fresh_var("c", avoid)
    c2 = fresh_var("c", avoid | {c1})
    return c1, c2


def _conj(*qs: Query) -> Query:
    """Flat conjunction of ``qs`` without repeated conjuncts."""
    items = []
    for q in qs:
        items += flat_and(q)
    return conj(dict.fromkeys(items))


class _Builder:
    """Constructors for the rewritten shapes.

    ``scope`` mini-scopes every new existential and aggregation.  ``arrange``
    orders the conjuncts of a new conjunction (default: as given).  With
    ``prune`` a negated conjunction drops the conjuncts its context already
    asserts, since ``A AND NOT (A AND B)`` is ``A AND NOT B``.
    """

    def __init__(self, scope: bool, arrange=None, prune: bool = False):
        self.scope = scope
        self.arrange = arrange
        self.prune = prune

    def exists(self, vs, body: Query) -> Query:
        q = exists_many(vs, body)
        return _scope_exists(q) if self.scope else q

    def count(self, c: str, vs, body: Query) -> Query:
        q = CntAgg(c, tuple(vs), body)
        return _scope_count(q) if self.scope else q

    def conj(self, *qs: Query) -> Query:
        items = []
        for q in qs:
            items += flat_and(q)
        items = list(dict.fromkeys(items))
        if self.arrange is not None:
            return self.arrange(items)
        return conj(items)

    def and_not(self, left: Query, right: Query) -> Query | None:
        """``left AND NOT right``, or None when that is unsatisfiable."""
        if self.prune:
            known = set(flat_and(left))
            rest = [r for r in flat_and(right) if r not in known]
            if not rest:
                return None
            right = conj(rest)
        return self.conj(left, Not(right))


def _matched(site: _Site) -> Query:
    """``qv`` together with at least one of the negated conjuncts."""
    return disj(_conj(site.qv, g) for g in site.gammas)


def _or(a: Query | None, b: Query) -> Query:
    return b if a is None else Or(a, b)


def _hash(q: Query, b: _Builder) -> Query:
    site = _site(q)
    c1, c2 = _fresh_pair(q)
    none_matched = b.and_not(b.exists(site.vs, site.qv), b.exists(site.vs, _matched(site)))
    counted = exists_many([c1, c2], b.conj(b.count(c1, site.vs, site.qv),
                                           b.count(c2, site.vs, _matched(site)),
                                           Not(Eq(c1, Var(c2)))))
    return _or(none_matched, counted)


def _hashhash(q: Query, b: _Builder) -> Query:
    if not (isinstance(q, And) and isinstance(q.r, Not)):
        raise NoMatch(f"no negated existential conjunct: {q}")
    if not is_ranf(q):
        raise NoMatch(f"not in RANF: {q}")
    head = q.l
    site = _site(q.r.q)
    c1, c2 = _fresh_pair(q)
    empty = b.and_not(head, b.exists(site.vs, site.qv))
    equal = exists_many([c1, c2], b.conj(head, b.count(c1, site.vs, site.qv),
                                         b.count(c2, site.vs, _matched(site)),
                                         Eq(c1, Var(c2))))
    return _or(empty, equal)


def apply_hash(q: Query, scope: bool = False) -> Query:
    """Replace an existential over negated conjuncts by a count comparison.

    ``q`` must be ``EXISTS vs. Qv AND NOT G1 ... AND NOT Gk`` in RANF with
    ``k >= 1``.  The result is in RANF and has the same answers.
    """
    return _hash(q, _Builder(scope))


def apply_hashhash(q: Query, scope: bool = False) -> Query:
    """Rewrite ``H AND NOT (EXISTS vs. Qv AND NOT G1 ...)`` to compare counts.

    Only the last conjunct of ``q`` is inspected.
    """
    return _hashhash(q, _Builder(scope))


# ---------------------------------------------------------------- mini-scoping


def _components(items: list[Query], bound: set[str]) -> tuple[list[Query], list[list[Query]]]:
    """Conjuncts without bound variables, and the rest grouped by shared bound variables."""
    outside = [i for i in items if not fv(i) & bound]
    inside = [i for i in items if fv(i) & bound]
    groups: list[tuple[set[str], list[Query]]] = []
    for item in inside:
        vs = set(fv(item) & bound)
        merged = [g for g in groups if g[0] & vs]
        for g in merged:
            groups.remove(g)
            vs |= g[0]
        members = [m for g in merged for m in g[1]] + [item]
        groups.append((vs, members))
    ordered = [[i for i in inside if i in g[1]] for g in groups]
    ordered.sort(key=lambda g: inside.index(g[0]))
    return outside, ordered


def _scope_exists(q: Query) -> Query:
    vs = []
    body = q
    while isinstance(body, Exists):
        vs.append(body.var)
        body = body.body
    outside, groups = _components(flat_and(body), set(vs))
    if not outside and len(groups) <= 1:
        return q
    parts = [conj(outside)] if outside else []
    for g in groups:
        gvs = [v for v in vs if v in fv(conj(g))]
        parts.append(exists_many(gvs, conj(g)))
    res = conj(parts)
    return res if is_ranf(res) and all(is_ranf(p) for p in parts) else q


def _scope_count(q: CntAgg) -> Query:
    bound = set(q.bound)
    outside, groups = _components(flat_and(q.body), bound)
    if not groups or (not outside and len(groups) == 1):
        return q
    pieces = [conj(outside)] if outside else []
    if len(groups) == 1:
        inner = conj(groups[0])
        pieces.append(CntAgg(q.result, tuple(v for v in q.bound if v in fv(inner)), inner))
        res = conj(pieces)
    else:
        # Disjoint bound variables: the count is a product of per-group counts.
        avoid = set(av(q))
        names = []
        aggs = []
        for g in groups:
            body = conj(g)
            name = fresh_var("c", avoid)
            avoid.add(name)
            names.append(name)
            aggs.append(CntAgg(name, tuple(v for v in q.bound if v in fv(body)), body))
        acc = aggs[0]
        acc_name = names[0]
        for name, agg in zip(names[1:], aggs[1:]):
            last = agg is aggs[-1]
            out = q.result if last else fresh_var("c", avoid)
            avoid.add(out)
            acc = exists_many([acc_name, name], And(And(acc, agg), Mul(out, acc_name, name)))
            acc_name = out
        pieces.append(acc)
        res = conj(pieces)
    if not is_ranf(res) or any(not is_ranf(p) for p in pieces):
        return q
    return res


def mini_scope(q: Query) -> Query:
    """Move conjuncts out of existentials and count aggregations they do not depend on.

    Count aggregations over conjuncts with disjoint bound variables become
    products of smaller counts.  Existentials are rewritten exactly.  For
    count aggregations the result differs only by zero counts of groups
    that became empty; see the module notes.
    """
    match q:
        case Not(a):
            return Not(mini_scope(a))
        case And(a, b):
            return And(mini_scope(a), mini_scope(b))
        case Or(a, b):
            return Or(mini_scope(a), mini_scope(b))
        case Exists():
            vs = []
            body = q
            while isinstance(body, Exists):
                vs.append(body.var)
                body = body.body
            return _scope_exists(exists_many(vs, mini_scope(body)))
        case CntAgg(c, bound, body):
            return _scope_count(CntAgg(c, bound, mini_scope(body)))
    return q


# ---------------------------------------------------------------- driver


class Counter:
    """Cost-guided application of the count rewrites on a training structure.

    The plain search compares, at every rewrite site, no rewrite, the
    rewrite and the mini-scoped rewrite.  ``extended`` adds candidates that
    prune negated conjunctions, order conjunctions greedily by cost and
    push existentials into disjunctions before mini-scoping them.
    """

    def __init__(self, training: Structure | None = None, extended: bool = False):
        self.training = training
        self.extended = extended
        self._cost: dict[Query, int] = {}
        self._memo: dict[Query, Query] = {}

    def cost(self, q: Query) -> int:
        if self.training is None:
            return 0
        c = self._cost.get(q)
        if c is None:
            c = cost(q, self.training)
            self._cost[q] = c
        return c

    def cnt(self, q: Query) -> Query:
        res = self._memo.get(q)
        if res is None:
            res = self._cnt(q)
            self._memo[q] = res
        return res

    def arrange(self, items: list[Query]) -> Query:
        """Conjunction of ``items`` built greedily, cheapest valid prefix first."""
        todo = list(items)
        prefix: Query | None = None
        while todo:
            best = None
            for i, item in enumerate(todo):
                cand = item if prefix is None else And(prefix, item)
                if not is_ranf(cand):
                    continue
                key = (self.cost(cand), i)
                if best is None or key < best[0]:
                    best = (key, item, cand)
            if best is None:
                return conj(items)
            todo.remove(best[1])
            prefix = best[2]
        return conj(items) if prefix is None else prefix

    def _children(self, q: Query) -> Query:
        match q:
            case Not(a):
                return Not(self.cnt(a))
            case And(a, b):
                return And(self.cnt(a), self.cnt(b))
            case Or(a, b):
                return Or(self.cnt(a), self.cnt(b))
            case Exists(v, body):
                return Exists(v, self.cnt(body))
            case CntAgg(c, bound, body):
                return CntAgg(c, bound, self.cnt(body))
        return q

    def _parts(self, q: Query) -> Query:
        """``q`` with the pieces a rewrite keeps already optimized."""
        if isinstance(q, And) and isinstance(q.r, Not):
            try:
                site = _site(q.r.q)
            except NoMatch:
                site = None
            if site is not None:
                return And(self.cnt(q.l), Not(self._site_parts(q.r.q, site)))
        return self._site_parts(q, _site(q))

    def _site_parts(self, q: Query, site: _Site) -> Query:
        body = self.cnt(site.qv)
        for g in site.gammas:
            body = And(body, Not(self.cnt(g)))
        return exists_many(site.vs, body)

    def _builders(self) -> list[_Builder]:
        out = [_Builder(False), _Builder(True)]
        if self.extended:
            out.append(_Builder(True, self.arrange, prune=True))
        return out

    def _cnt(self, q: Query) -> Query:
        if not is_ranf(q):
            # A negated conjunct such as NOT R(x): only its inside can change.
            return self._children(q)
        cands = [self._children(q)]
        for rewrite in (_hashhash, _hash):
            try:
                base = self._parts(q)
            except NoMatch:
                continue
            for b in self._builders():
                try:
                    cands.append(rewrite(base, b))
                except NoMatch:
                    break
        if self.extended and isinstance(q, Exists) and isinstance(cands[0].body, Or):
            # EXISTS v. (A OR B) is (EXISTS v. A) OR (EXISTS v. B), and each side
            # may then shed the conjuncts that do not mention v.
            v = q.var
            pushed = disj(_scope_exists(Exists(v, d)) if v in fv(d) else d
                          for d in flat_or(cands[0].body))
            if is_ranf(pushed):
                return pushed
        cands = [c for c in cands if is_ranf(c)]
        return min(enumerate(cands), key=lambda ic: (self.cost(ic[1]), ic[0]))[1]


def cnt(q: Query, training: Structure | None = None, extended: bool = False) -> Query:
    """Equivalent RANF query using count aggregations where that is cheaper on ``training``."""
    if not is_ranf(q):
        raise ValueError(f"not in relational algebra normal form: {q}")
    return Counter(training, extended).cnt(q)
