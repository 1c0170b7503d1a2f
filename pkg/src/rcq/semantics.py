"""Query evaluation.

Three evaluators live here, deliberately independent of each other:

``eval_naive``
    enumerates every assignment of the free variables over a finite domain
    and checks the query recursively.  Exponential; only for tiny inputs.
``eval_fin_dom``
    bottom-up evaluation over a finite domain where every intermediate result
    is a finite or co-finite set of tuples, with unconstrained columns kept
    implicit.  This is what the capturability oracle runs on.
``eval_ranf``
    the production evaluator for queries in relational algebra normal form.
    It only ever builds finite relations using projection, join, anti-join,
    union, selection, column duplication and counting.

:func:`capture_oracle` decides whether a query has infinitely many answers
over an infinite domain.  It evaluates over the active domain extended with
a few fresh atoms and checks whether any answer uses one of them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

from .ranges import is_ranf
from .relation import BudgetExceeded, Relation
from .syntax import (And, Atom, Bot, CntAgg, Const, Eq, Exists, Mul, Not, Or,
                     Pred, Query, Top, Var, av, fv, fvseq, subqueries)

__all__ = [
    "Structure", "Relation", "Finite", "Infinite", "CaptureResult", "adom",
    "eval_naive", "eval_fin_dom", "capture_oracle", "eval_ranf", "cost",
    "BudgetExceeded", "DEFAULT_BUDGET", "fresh_atoms",
]

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class Structure:
    """Finite interpretations of predicate symbols (and named constants)."""

    interps: Mapping[str, frozenset] = field(default_factory=dict)
    consts: Mapping[str, Atom] = field(default_factory=dict)

    @classmethod
    def of(cls, **tables: Iterable[tuple]) -> "Structure":
        return cls({k: frozenset(tuple(r) for r in v) for k, v in tables.items()})

    def table(self, name: str, arity: int) -> frozenset:
        rows = self.interps.get(name, frozenset())
        for r in rows:
            if len(r) != arity:
                raise ValueError(f"{name} holds a tuple of length {len(r)}, expected {arity}")
            break
        return rows

    def atoms(self) -> set[Atom]:
        return {a for rows in self.interps.values() for r in rows for a in r}


def adom(q: Query, s: Structure) -> set[Atom]:
    """Constants of ``q`` plus all atoms stored for predicates occurring in ``q``."""
    out: set[Atom] = set()
    names = set()
    for sub in subqueries(q):
        match sub:
            case Pred(name, args):
                names.add(name)
                out.update(t.value for t in args if isinstance(t, Const))
            case Eq(_, Const(v)):
                out.add(v)
    for name in names:
        for r in s.interps.get(name, ()):
            out.update(r)
    return out


def _term(t, alpha):
    return alpha[t.name] if isinstance(t, Var) else t.value


# ---------------------------------------------------------------- naive


def _holds(q: Query, s: Structure, dom: list, alpha: dict) -> bool:
    match q:
        case Bot():
            return False
        case Top():
            return True
        case Eq(lhs, rhs):
            return alpha[lhs] == _term(rhs, alpha)
        case Pred(name, args):
            return tuple(_term(t, alpha) for t in args) in s.interps.get(name, ())
        case Mul(c, a, b):
            va, vb, vc = alpha[a], alpha[b], alpha[c]
            return all(isinstance(v, int) for v in (va, vb, vc)) and vc == va * vb
        case Not(a):
            return not _holds(a, s, dom, alpha)
        case And(a, b):
            return _holds(a, s, dom, alpha) and _holds(b, s, dom, alpha)
        case Or(a, b):
            return _holds(a, s, dom, alpha) or _holds(b, s, dom, alpha)
        case Exists(v, body):
            saved = alpha.get(v)
            try:
                for d in dom:
                    alpha[v] = d
                    if _holds(body, s, dom, alpha):
                        return True
                return False
            finally:
                if saved is None:
                    alpha.pop(v, None)
                else:
                    alpha[v] = saved
        case CntAgg(c, bound, body):
            saved = {v: alpha.get(v) for v in bound}
            n = 0
            for combo in product(dom, repeat=len(bound)):
                alpha.update(zip(bound, combo))
                n += _holds(body, s, dom, alpha)
            for v, old in saved.items():
                if old is None:
                    alpha.pop(v, None)
                else:
                    alpha[v] = old
            if n == 0 and not (fv(body) <= set(bound)):
                return False
            return alpha[c] == n
    raise TypeError(f"not a query: {q!r}")


def eval_naive(q: Query, s: Structure, dom: Iterable[Atom], budget: int = 10**6) -> Relation:
    """Reference semantics by enumerating all assignments over ``dom``."""
    dom = list(dict.fromkeys(dom))
    cols = fvseq(q)
    if len(dom) ** len(cols) > budget:
        raise BudgetExceeded(f"{len(dom)}^{len(cols)} assignments")
    rows = []
    for combo in product(dom, repeat=len(cols)):
        if _holds(q, s, dom, dict(zip(cols, combo))):
            rows.append(combo)
    return Relation.make(cols, rows)


# ---------------------------------------------------------------- finite / co-finite evaluation


@dataclass(frozen=True)
class _Clause:
    """Tuples whose projection on ``pos`` is in it and on each of ``negs`` is not."""

    pos: Relation
    negs: tuple[Relation, ...] = ()


@dataclass(frozen=True)
class _Val:
    """A disjunction of clauses over the variables ``vars``.

    Columns in ``vars`` mentioned by no relation of a clause are
    unconstrained in that clause.  Negated parts stay symbolic until a
    quantifier or the final answer needs them, which keeps cylindrical
    extensions over the whole domain rare.
    """

    clauses: tuple[_Clause, ...]
    vars: frozenset


_UNIT = Relation.unit()


class _FinDom:
    MAX_CLAUSES = 256

    def __init__(self, s: Structure, dom: Iterable[Atom], budget: int):
        self.s = s
        self.dom = list(dict.fromkeys(dom))
        self.domset = set(self.dom)
        self.budget = budget

    def _check(self, n: int):
        if n > self.budget:
            raise BudgetExceeded(f"materialising {n} tuples exceeds the budget of {self.budget}")

    def extend(self, rel: Relation, cols: Iterable[str]) -> Relation:
        """Cylindrical extension of ``rel`` to ``cols`` (a superset of its columns)."""
        extra = [c for c in dict.fromkeys(cols) if c not in rel.columns]
        if not extra or not rel:
            return Relation(rel.columns + tuple(extra), frozenset()) if extra else rel
        self._check(len(rel) * len(self.dom) ** len(extra))
        fill = list(product(self.dom, repeat=len(extra)))
        rows = frozenset(r + f for r in rel.rows for f in fill)
        return Relation(rel.columns + tuple(extra), rows)

    def clause(self, pos: Relation, negs: Iterable[Relation]) -> _Clause | None:
        """Normal form: negated parts inside the positive columns are applied; None if empty."""
        keep = []
        for n in negs:
            if not n:
                continue
            if set(n.columns) <= set(pos.columns):
                pos = pos.antijoin(n)
            else:
                keep.append(n)
            if not pos:
                return None
        if not pos:
            return None
        return _Clause(pos, tuple(dict.fromkeys(keep)))

    def val(self, clauses: Iterable[_Clause | None], vs) -> _Val:
        return _Val(tuple(dict.fromkeys(c for c in clauses if c is not None)), frozenset(vs))

    def lit(self, rel: Relation) -> _Val:
        return self.val([self.clause(rel, ())], rel.columns)

    def pos(self, a: _Val) -> Relation:
        """Materialise ``a`` as a finite relation over all its variables."""
        cols = tuple(sorted(a.vars))
        rows: set = set()
        for c in a.clauses:
            rel = self.extend(c.pos, cols)
            for n in c.negs:
                rel = rel.antijoin(n)
            rows |= rel.reorder(cols).rows
        return Relation(cols, frozenset(rows))

    def _collapse(self, a: _Val) -> _Val:
        return self.lit(self.pos(a)) if len(a.clauses) > 1 else a

    # boolean structure ------------------------------------------------

    def conj(self, a: _Val, b: _Val) -> _Val:
        if len(a.clauses) * len(b.clauses) > self.MAX_CLAUSES:
            a, b = self._collapse(a), self._collapse(b)
        out = []
        for x in a.clauses:
            for y in b.clauses:
                if not set(x.pos.columns) & set(y.pos.columns):
                    self._check(len(x.pos) * len(y.pos))
                out.append(self.clause(x.pos.join(y.pos), x.negs + y.negs))
        return self.val(out, a.vars | b.vars)

    def disj(self, a: _Val, b: _Val) -> _Val:
        return self.val(a.clauses + b.clauses, a.vars | b.vars)

    def neg(self, a: _Val) -> _Val:
        # not (P and not N1 and ...)  ==  not P or N1 or ...
        n = 1
        for c in a.clauses:
            n *= 1 + len(c.negs)
        if n > self.MAX_CLAUSES:
            a = self._collapse(a)
        out = self.val([_Clause(_UNIT)], a.vars)
        for c in a.clauses:
            alts = [self.clause(_UNIT, (c.pos,))] + [self.clause(m, ()) for m in c.negs]
            out = self.conj(out, self.val(alts, a.vars))
        return out

    def exists(self, v: str, a: _Val) -> _Val:
        return self.val((self._exists(v, c) for c in a.clauses), a.vars - {v})

    def _exists(self, v: str, c: _Clause) -> _Clause | None:
        hit = [n for n in c.negs if v in n.columns]
        rest = tuple(n for n in c.negs if v not in n.columns)
        pos = c.pos
        if v in pos.columns:
            if len(hit) == 1:
                return self.clause(pos.drop(v), rest + (self._blocked(pos, v, hit[0]),))
            if hit:
                pos = self.extend(pos, [x for n in hit for x in n.columns])
                for n in hit:
                    pos = pos.antijoin(n)
            return self.clause(pos.drop(v), rest)
        if not hit:
            # an unconstrained column: the domain is non-empty
            return c
        # exists v. not (N1 or ...)  ==  not (forall v. N1 or ...)
        cols = tuple(dict.fromkeys(x for n in hit for x in n.columns))
        if len(hit) == 1:
            blocked = hit[0].reorder(cols)
        else:
            rows: set = set()
            for n in hit:
                rows |= self.extend(n, cols).reorder(cols).rows
            blocked = Relation(cols, frozenset(rows))
        i = cols.index(v)
        counts = Counter(tuple(x for j, x in enumerate(r) if j != i) for r in blocked.rows)
        full = Relation(tuple(x for x in cols if x != v),
                        frozenset(k for k, n in counts.items() if n == len(self.dom)))
        return self.clause(pos, rest + (full,))

    @staticmethod
    def _blocked(pos: Relation, v: str, neg: Relation) -> Relation:
        """Tuples ``(u, e)`` with ``exists v. pos(u, v)`` where every such ``v`` hits ``neg``.

        ``e`` are the columns of ``neg`` missing from ``pos``; the result
        negated and joined with ``exists v. pos`` is ``exists v. pos and not neg``.
        """
        key = [c for c in neg.columns if c in pos.columns and c != v]
        extra = [c for c in neg.columns if c not in pos.columns]
        ki = [neg.columns.index(c) for c in key]
        ei = [neg.columns.index(c) for c in extra]
        vi = neg.columns.index(v)
        index: dict[tuple, dict[tuple, set]] = {}
        for r in neg.rows:
            index.setdefault(tuple(r[i] for i in ki), {}).setdefault(tuple(r[i] for i in ei), set()).add(r[vi])
        ucols = tuple(c for c in pos.columns if c != v)
        ui = [pos.columns.index(c) for c in ucols]
        pv = pos.columns.index(v)
        groups: dict[tuple, set] = {}
        for r in pos.rows:
            groups.setdefault(tuple(r[i] for i in ui), set()).add(r[pv])
        uk = [ucols.index(c) for c in key]
        rows = set()
        for u, vs in groups.items():
            for e, hits in index.get(tuple(u[i] for i in uk), {}).items():
                if vs <= hits:
                    rows.add(u + e)
        return Relation(ucols + tuple(extra), frozenset(rows))

    # evaluation -------------------------------------------------------

    def eval(self, q: Query) -> _Val:
        match q:
            case Bot():
                return self.val([], ())
            case Top():
                return self.lit(_UNIT)
            case Eq(lhs, Const(v)):
                rows = frozenset({(v,)}) if v in self.domset else frozenset()
                return self.lit(Relation((lhs,), rows))
            case Eq(lhs, Var(rhs)):
                if lhs == rhs:
                    return self.val([_Clause(_UNIT)], (lhs,))
                return self.lit(Relation((lhs, rhs), frozenset((d, d) for d in self.dom)))
            case Pred(name, args):
                return self.lit(self.pred(name, args))
            case Mul(c, a, b):
                ints = [d for d in self.dom if isinstance(d, int)]
                names = list(dict.fromkeys([a, b, c]))
                rows = set()
                for x, y in product(ints, repeat=2):
                    if x * y in self.domset:
                        val = {a: x, b: y}
                        if c in val and val[c] != x * y:
                            continue
                        if a == b and x != y:
                            continue
                        val.setdefault(c, x * y)
                        rows.add(tuple(val[n] for n in names))
                return self.lit(Relation(tuple(names), frozenset(rows)))
            case Not(a):
                return self.neg(self.eval(a))
            case And(a, b):
                return self.conj(self.eval(a), self.eval(b))
            case Or(a, b):
                return self.disj(self.eval(a), self.eval(b))
            case Exists(v, body):
                inner = self.eval(body)
                if v not in inner.vars:
                    return inner
                return self.exists(v, inner)
            case CntAgg(c, bound, body):
                inner = self.pos(self.eval(body))
                # counted variables missing from the body range over the whole domain
                mult = len(self.dom) ** sum(1 for v in bound if v not in inner.columns)
                group = [x for x in inner.columns if x not in bound]
                gi = [inner.columns.index(x) for x in group]
                counts = Counter(tuple(r[i] for i in gi) for r in inner.rows)
                if not group:
                    counts[()] += 0
                rows = set()
                for key, n in counts.items():
                    if c in group:
                        if key[group.index(c)] == n * mult:
                            rows.add(key)
                    else:
                        rows.add(key + (n * mult,))
                cols = tuple(group) if c in group else tuple(group) + (c,)
                return self.lit(Relation(cols, frozenset(rows)))
        raise TypeError(f"not a query: {q!r}")

    def pred(self, name: str, args) -> Relation:
        table = self.s.table(name, len(args))
        names = list(dict.fromkeys(t.name for t in args if isinstance(t, Var)))
        rows = set()
        for r in table:
            val: dict[str, Atom] = {}
            ok = True
            for t, a in zip(args, r):
                if isinstance(t, Const):
                    ok = t.value == a
                elif val.setdefault(t.name, a) != a:
                    ok = False
                if not ok:
                    break
            if ok:
                rows.add(tuple(val[n] for n in names))
        return Relation(tuple(names), frozenset(rows))


def eval_fin_dom(q: Query, s: Structure, dom: Iterable[Atom], budget: int = DEFAULT_BUDGET) -> Relation:
    """Satisfying tuples of ``q`` when quantifiers range over the finite set ``dom``.

    ``dom`` must contain the active domain.  Columns follow :func:`fvseq`.
    """
    ev = _FinDom(s, dom, budget)
    res = ev.pos(ev.eval(q))
    return res.reorder(fvseq(q))


# ---------------------------------------------------------------- capturability


@dataclass(frozen=True)
class Finite:
    relation: Relation

    @property
    def rows(self) -> frozenset:
        return self.relation.rows


@dataclass(frozen=True)
class Infinite:
    pass


CaptureResult = Finite | Infinite


def fresh_atoms(avoid: set[Atom], count: int) -> list[str]:
    out = []
    i = 0
    while len(out) < count:
        a = f"~fresh{i}"
        if a not in avoid:
            out.append(a)
        i += 1
    return out


def width(q: Query) -> int:
    """Most free variables of ``q`` or of the body of any quantifier in ``q``."""
    w = len(fv(q))
    for sub in subqueries(q):
        if isinstance(sub, (Exists, CntAgg)):
            w = max(w, len(fv(sub.body)))
    return w


def capture_oracle(q: Query, s: Structure, extra: int = 0, budget: int = DEFAULT_BUDGET) -> CaptureResult:
    """Decide whether ``q`` has infinitely many answers and return them if not.

    Quantifiers range over the active domain plus ``width(q)+1`` fresh atoms
    (``extra`` adds more).  An assignment to the free variables of a
    quantifier body uses at most ``width(q)`` atoms, so some fresh atom is
    always unused and stands for every atom outside the active domain.  By
    genericity, an answer that mentions a fresh atom stands for infinitely
    many answers over an infinite domain.
    """
    base = adom(q, s)
    fresh = fresh_atoms(base, width(q) + 1 + extra)
    dom = sorted(base, key=_akey) + fresh
    ev = _FinDom(s, dom, budget)
    res = ev.eval(q)
    cols = fvseq(q)
    freshset = set(fresh)
    if not cols:
        return Finite(ev.pos(res))
    # fresh atoms are interchangeable, so some answer mentions a fresh atom
    # exactly when some answer has the last fresh atom in some column
    probe = fresh[-1]
    for x in cols:
        pinned = ev.conj(res, ev.lit(Relation((x,), frozenset({(probe,)}))))
        if ev.pos(pinned):
            return Infinite()
    return Finite(ev.pos(res).reorder(cols))


def _akey(a):
    from .syntax import atom_key

    return atom_key(a)


# ---------------------------------------------------------------- RANF evaluation


class _Ranf:
    def __init__(self, s: Structure):
        self.s = s
        self.memo: dict[Query, Relation] = {}

    def eval(self, q: Query) -> Relation:
        res = self.memo.get(q)
        if res is None:
            res = self._eval(q)
            self.memo[q] = res
        return res

    def _eval(self, q: Query) -> Relation:
        match q:
            case Bot():
                return Relation.empty()
            case Top():
                return Relation.unit()
            case Eq(lhs, Const(v)):
                return Relation.make((lhs,), [(v,)])
            case Pred(name, args):
                return _FinDom(self.s, (), 0).pred(name, args)
            case Not(a):
                return Relation.empty() if self.eval(a) else Relation.unit()
            case Or(a, b):
                return self.eval(a).union(self.eval(b))
            case And(a, b):
                return self.conj(a, b)
            case Exists(v, body):
                return self.eval(body).drop(v)
            case CntAgg(c, bound, body):
                inner = self.eval(body)
                group = [x for x in inner.columns if x not in bound]
                return inner.count(group, c)
        raise ValueError(f"not in relational algebra normal form: {q}")

    def conj(self, a: Query, b: Query) -> Relation:
        left = self.eval(a)
        match b:
            case Eq(u, Var(v)):
                if u in left.columns and v in left.columns:
                    return left.select_eq(u, v)
                if u in left.columns:
                    return left.duplicate(u, v)
                return left.duplicate(v, u)
            case Not(Eq(u, Var(v))) if u in left.columns and v in left.columns:
                return left.select_neq(u, v)
            case Not(c) if set(fv(c)) <= set(left.columns):
                return left.antijoin(self.eval(c))
            case Mul(c, x, y):
                i, j = left.columns.index(x), left.columns.index(y)
                if c in left.columns:
                    k = left.columns.index(c)
                    return Relation(left.columns, frozenset(
                        r for r in left.rows if isinstance(r[i], int) and isinstance(r[j], int)
                        and r[k] == r[i] * r[j]))
                return Relation(left.columns + (c,), frozenset(
                    r + (r[i] * r[j],) for r in left.rows
                    if isinstance(r[i], int) and isinstance(r[j], int)))
        return left.join(self.eval(b))


def eval_ranf(q: Query, s: Structure, check: bool = True) -> Relation:
    """Evaluate a RANF query with relational algebra; columns follow :func:`fvseq`."""
    if check and not is_ranf(q):
        raise ValueError(f"not in relational algebra normal form: {q}")
    return _Ranf(s).eval(q).reorder(fvseq(q))


def cost(q: Query, s: Structure) -> int:
    """Sum of ``|result| * |free variables|`` over the distinct RANF subqueries of ``q``."""
    if not is_ranf(q):
        raise ValueError(f"not in relational algebra normal form: {q}")
    ev = _Ranf(s)
    total = 0
    for sub in set(subqueries(q)):
        if is_ranf(sub):
            total += len(ev.eval(sub)) * len(fv(sub))
    return total
