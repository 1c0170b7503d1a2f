"""Normal forms: SRNF and RANF.

:func:`srnf` pushes negations down to atoms, equalities and existentials,
drops binders whose variable does not occur and distributes existentials
over disjunction.  :func:`sr2ranf` then turns a safe-range query in that
shape into relational algebra normal form.  It does so by conjoining
restricting subqueries wherever a subquery on its own would not be
evaluable with the relational operators.

Several choices in :func:`sr2ranf` are left open by the algorithm: which
restricting subqueries to conjoin, and which conjuncts to keep.  Every
minimal choice is tried and the cheapest result on a training structure
wins.  Without a training structure all candidates cost zero and the first
one in enumeration order is taken.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

from .ranges import is_ranf, is_safe_range
from .semantics import Structure, cost
from .syntax import (TRUE, And, Eq, Exists, Not, Or, Pred, Query, Var, av, cp,
                     disj, exists_many, flat_and, flat_or, fv, fresh_var,
                     query_key, subqueries, subst_var)

__all__ = ["srnf", "is_srnf", "sr2ranf", "sr2ranf_qry", "sconj", "Normalizer",
           "minimal_subsets", "SubsetLimit"]

# Upper bound on candidate subsets inspected per choice point.  Beyond it the
# enumeration stops early and keeps the minimal subsets found so far.
SubsetLimit = 4096


# ---------------------------------------------------------------- SRNF


def srnf(q: Query) -> Query:
    """Equivalent query whose negations only sit above atoms, equalities and existentials."""
    return _push(q)


def _push(q: Query) -> Query:
    match q:
        case Not(Not(a)):
            return _push(a)
        case Not(Or(a, b)):
            return _push(And(Not(a), Not(b)))
        case Not(And(a, b)):
            return _push(Or(Not(a), Not(b)))
        case Not(Exists()):
            vs, body = _unbind(q.q)
            keep = [v for v in vs if v in fv(body)]
            if not keep:
                return _push(Not(body))
            inner = _push(body)
            if isinstance(inner, Or):
                return _push(And(Not(exists_many(vs, inner.l)), Not(exists_many(vs, inner.r))))
            return Not(exists_many(keep, inner))
        case Not(a):
            return Not(_push(a))
        case Or(a, b):
            return Or(_push(a), _push(b))
        case And(a, b):
            return And(_push(a), _push(b))
        case Exists():
            vs, body = _unbind(q)
            inner = _push(body)
            if isinstance(inner, Or):
                return _push(Or(exists_many(vs, inner.l), exists_many(vs, inner.r)))
            return exists_many([v for v in vs if v in fv(inner)], inner)
    return q


def _unbind(q: Query) -> tuple[list[str], Query]:
    """Split a run of nested existentials into its variables and body."""
    vs = []
    while isinstance(q, Exists):
        vs.append(q.var)
        q = q.body
    return vs, q


def is_srnf(q: Query) -> bool:
    """Whether every negated subquery is an atom, an equality or an existential."""
    for sub in subqueries(q):
        if isinstance(sub, Not) and not isinstance(sub.q, (Pred, Eq, Exists)):
            return False
        if isinstance(sub, Exists) and sub.var not in fv(sub.body):
            return False
    return True


# ---------------------------------------------------------------- helpers


def _is_var_eq(q: Query) -> bool:
    return isinstance(q, Eq) and isinstance(q.rhs, Var)


def sconj(qs: Iterable[Query]) -> Query:
    """Left-associated conjunction of ``qs`` arranged to be in RANF when possible.

    Positive conjuncts come first, each one preferably sharing a variable
    with the conjuncts before it.  Equalities between variables follow,
    each chosen to mention a variable that is already bound.  Negations
    come last.
    """
    pos, eqs, negs = [], [], []
    for q in dict.fromkeys(qs):
        if _is_var_eq(q):
            eqs.append(q)
        elif isinstance(q, Not):
            negs.append(q)
        else:
            pos.append(q)
    pos.sort(key=query_key)
    eqs.sort(key=query_key)
    negs.sort(key=lambda n: (not _is_var_eq(n.q), query_key(n)))

    out: list[Query] = []
    seen: set[str] = set()
    while pos:
        nxt = next((p for p in pos if fv(p) & seen), pos[0]) if seen else pos[0]
        pos.remove(nxt)
        out.append(nxt)
        seen |= fv(nxt)
    while eqs:
        nxt = next((e for e in eqs if fv(e) & seen), eqs[0])
        eqs.remove(nxt)
        out.append(nxt)
        seen |= fv(nxt)
    out += negs
    res = None
    for q in out:
        res = q if res is None else And(res, q)
    return TRUE if res is None else res


def minimal_subsets(items: Sequence, ok, limit: int = SubsetLimit) -> list[tuple]:
    """All inclusion-minimal subsets of ``items`` satisfying ``ok``, smallest first."""
    found: list[frozenset] = []
    out: list[tuple] = []
    tried = 0
    n = len(items)
    for k in range(n + 1):
        for idx in combinations(range(n), k):
            s = frozenset(idx)
            if any(f <= s for f in found):
                continue
            tried += 1
            if tried > limit:
                return out
            if ok([items[i] for i in idx]):
                found.append(s)
                out.append(tuple(items[i] for i in idx))
    return out


# ---------------------------------------------------------------- RANF


class Normalizer:
    """Runs :func:`sr2ranf` with choices scored on a training structure."""

    def __init__(self, training: Structure | None = None):
        self.training = training
        self.memo: dict[tuple[Query, frozenset], tuple[Query, frozenset]] = {}

    def score(self, q: Query) -> int:
        if self.training is None or not is_ranf(q):
            return 0
        return cost(q, self.training)

    def best(self, candidates: list[tuple[Query, frozenset]]) -> tuple[Query, frozenset]:
        return min(candidates, key=lambda c: (self.score(c[0]), query_key(c[0])))

    def qry(self, q: Query) -> Query:
        if not is_safe_range(q):
            raise ValueError(f"query is not safe range: {q}")
        return self.sr2ranf(srnf(q), frozenset())[0]

    def sr2ranf(self, q: Query, gamma: frozenset) -> tuple[Query, frozenset]:
        key = (q, gamma)
        res = self.memo.get(key)
        if res is None:
            res = self._sr2ranf(q, gamma)
            self.memo[key] = res
        return res

    def _sr2ranf(self, q: Query, gamma: frozenset) -> tuple[Query, frozenset]:
        if is_ranf(q):
            return cp(q), frozenset()
        glist = sorted(gamma, key=query_key)
        match q:
            case Eq(_, Var()):
                # Every restrictor gets conjoined here, so all of them are implied.
                return self.sr2ranf(conj_all([q, *glist]), frozenset())[0], gamma
            case Not(inner):
                subsets = minimal_subsets(glist, lambda gs: is_safe_range(conj_all([q, *gs])))
                if not subsets:
                    raise ValueError(f"no restriction makes {q} safe range")
                if subsets == [()]:
                    sub, _ = self.sr2ranf(inner, frozenset())
                    return cp(Not(sub)), frozenset()
                return self.best([self.sr2ranf(conj_all([q, *gs]), frozenset()) for gs in subsets])
            case Or():
                ds = flat_or(q)
                subsets = minimal_subsets(
                    glist, lambda gs: is_safe_range(disj(conj_all([d, *gs]) for d in ds)))
                if not subsets:
                    raise ValueError(f"no restriction makes {q} safe range")
                cands = []
                for gs in subsets:
                    parts = [self.sr2ranf(conj_all([d, *gs]), frozenset())[0] for d in ds]
                    cands.append((cp(disj(parts)), frozenset(gs)))
                return self.best(cands)
            case And():
                return self._conj(q, gamma)
            case Exists():
                return self._exists(q, gamma, glist)
        return cp(q), frozenset()

    def _conj(self, q: Query, gamma: frozenset) -> tuple[Query, frozenset]:
        items = list(dict.fromkeys(flat_and(q) + sorted(gamma, key=query_key)))
        neg = [c for c in items if isinstance(c, Not)]
        pos = [c for c in items if not isinstance(c, Not)]
        eqs = [c for c in pos if _is_var_eq(c)]
        pos = [c for c in pos if not _is_var_eq(c)]
        neqs = [c for c in neg if _is_var_eq(c.q)]
        neg = [c for c in neg if not _is_var_eq(c.q)]

        sub = {}
        for p in pos:
            sub[p] = self.sr2ranf(p, frozenset(pos + eqs) - {p})
        negs = [Not(self.sr2ranf(n.q, frozenset(pos + eqs))[0]) for n in neg]

        def covers(chosen):
            got = set()
            for p in chosen:
                got |= sub[p][1]
                got.add(p)
            return set(pos) <= got

        subsets = minimal_subsets(pos, covers)
        cands = []
        for chosen in subsets:
            body = sconj([sub[p][0] for p in chosen] + eqs + negs + neqs)
            restr = frozenset().union(*(sub[p][1] & gamma for p in chosen)) if chosen else frozenset()
            cands.append((cp(body), restr))
        if not cands:
            raise ValueError(f"no cover found for the conjuncts of {q}")
        return self.best(cands)

    def _exists(self, q: Query, gamma: frozenset, glist: list[Query]) -> tuple[Query, frozenset]:
        vs, body = _unbind(q)
        gfv = frozenset().union(*(fv(g) for g in glist)) if glist else frozenset()
        if gfv & set(vs):
            avoid = set(av(body)) | gfv | set(vs)
            ws = []
            for v in vs:
                w = fresh_var(v, avoid)
                avoid.add(w)
                ws.append(w)
            for v, w in zip(vs, ws):
                body = subst_var(body, v, w)
            vs = ws
        subsets = minimal_subsets(glist, lambda gs: is_safe_range(conj_all([body, *gs])))
        if not subsets:
            raise ValueError(f"no restriction makes {q} safe range")
        cands = []
        for gs in subsets:
            inner, _ = self.sr2ranf(conj_all([body, *gs]), frozenset())
            cands.append((cp(exists_many(vs, inner)), frozenset(gs)))
        return self.best(cands)


def conj_all(qs: Iterable[Query]) -> Query:
    """Left-associated conjunction without reordering or repeats (TRUE when empty)."""
    res = None
    for q in dict.fromkeys(qs):
        res = q if res is None else And(res, q)
    return TRUE if res is None else res


def sr2ranf(q: Query, gamma: Iterable[Query] = (), training: Structure | None = None) -> tuple[Query, frozenset]:
    """RANF query equivalent to ``q`` under the restrictors ``gamma``, with the restrictors used."""
    return Normalizer(training).sr2ranf(q, frozenset(gamma))


def sr2ranf_qry(q: Query, training: Structure | None = None) -> Query:
    """RANF query equivalent to the safe-range query ``q``."""
    return Normalizer(training).qry(q)
