"""Translation of arbitrary queries into a pair of safe-range queries.

:func:`rb` restricts the bound variables of a query.  The result agrees with
the input over every infinite domain.  :func:`split` then restricts the free
variables.  It returns ``(fin, inf)``, where the closed query ``inf`` holds
exactly when the input has infinitely many answers.  When ``inf`` does not
hold, ``fin`` has the same answers as the input.  :func:`rw` lowers both
components to relational algebra normal form.

Each restriction step picks a variable and a cover set.  Preference goes to
cover sets with fewer equalities, then to cheaper generators on the
training structure.  In the Van Gelder--Topor mode, restriction uses the
``con`` relation and generators quantify away every variable of an atom
except the restricted one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .normalize import Normalizer
from .ranges import (cov, eqs, is_evaluable, is_ranf, nongens, qps, vgt_con)
from .semantics import Structure, cost
from .syntax import (FALSE, TRUE, And, Eq, Exists, Not, Or, Query, Var, cp,
                     disj, exists_many, exists_smart, flat_and, flat_or, fv, fvseq,
                     query_key, subst_bot, subst_var)

__all__ = [
    "Translator", "TranslationResult", "NotEvaluable", "rb", "split", "rw",
    "sconj_eqs", "eclass", "hanging",
]


class NotEvaluable(ValueError):
    """The Van Gelder--Topor mode only handles evaluable queries."""


@dataclass(frozen=True)
class TranslationResult:
    fin: Query
    inf: Query


# ---------------------------------------------------------------- equality relations


def eclass(e: Iterable[tuple[str, str]]) -> list[frozenset]:
    """Equivalence classes of the variables related by ``e``, sorted."""
    parent: dict[str, str] = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in e:
        ra, rb_ = find(a), find(b)
        if ra != rb_:
            parent[max(ra, rb_)] = min(ra, rb_)
    classes: dict[str, set] = {}
    for v in list(parent):
        classes.setdefault(find(v), set()).add(v)
    return sorted((frozenset(c) for c in classes.values()), key=sorted)


def hanging(qf: Query, e: Iterable[tuple[str, str]]) -> frozenset:
    """Variables in equivalence classes that share nothing with ``fv(qf)``."""
    free = fv(qf)
    out: set[str] = set()
    for c in eclass(e):
        if not c & free:
            out |= c
    return frozenset(out)


def sconj_eqs(qf: Query, e: Iterable[tuple[str, str]]) -> Query:
    """``qf`` conjoined with the equalities of ``e`` so the result is safe range when possible.

    Each next equality mentions a variable that is already free, if one does.
    """
    todo = sorted(set(e))
    seen = set(fv(qf))
    out = qf
    while todo:
        nxt = next((p for p in todo if p[0] in seen or p[1] in seen), todo[0])
        todo.remove(nxt)
        out = And(out, Eq(nxt[0], Var(nxt[1])))
        seen |= set(nxt)
    return out


# ---------------------------------------------------------------- translator


def _vgt_generator(x: str, a: Query) -> Query:
    """``a`` with its variables other than ``x`` quantified, first variable innermost."""
    for v in fvseq(a):
        if v != x:
            a = Exists(v, a)
    return a


@dataclass
class _Cover:
    """A restriction choice: generator query and the equality partners."""

    gen: Query
    partners: list[str]
    score: tuple = field(default=())


class Translator:
    """Runs :func:`rb`, :func:`split` and :func:`rw` with a fixed configuration.

    ``training`` scores nondeterministic choices (none: first choice in
    canonical order).  ``mode`` is ``"rc2sql"`` or ``"vgt"``.  With
    ``cp_extra`` the intermediate results are simplified by constant
    propagation after every step.
    """

    def __init__(self, training: Structure | None = None, mode: str = "rc2sql", cp_extra: bool = True):
        if mode not in ("rc2sql", "vgt"):
            raise ValueError(f"unknown mode {mode!r}")
        self.training = training
        self.mode = mode
        self.cp_extra = cp_extra
        self._cost_memo: dict[Query, int] = {}
        self._rb_memo: dict[Query, Query] = {}

    # -- helpers

    def _cp(self, q: Query) -> Query:
        return cp(q) if self.cp_extra else q

    def restrict(self, fix: Query, gen: Query) -> Query:
        """``fix AND gen``, or FALSE when ``fix`` already denies every disjunct of ``gen``."""
        if self.cp_extra:
            negated = set(flat_and(fix))
            if gen != FALSE and all(Not(g) in negated for g in flat_or(gen)):
                return FALSE
        return self._cp(And(fix, gen))

    def qcost(self, q: Query) -> int:
        if self.training is None:
            return 0
        c = self._cost_memo.get(q)
        if c is None:
            c = cost(q, self.training) if is_ranf(q) else 0
            self._cost_memo[q] = c
        return c

    def covers(self, x: str, q: Query) -> list[_Cover]:
        """Restriction choices for ``x`` in ``q``, best first."""
        out = []
        if self.mode == "vgt":
            for A in vgt_con(x, q):
                if not A:
                    continue
                gens = sorted((_vgt_generator(x, a) for a in A), key=query_key)
                out.append(_Cover(disj(gens), [], (0, sum(self.qcost(g) for g in gens), len(gens),
                                                   [query_key(g) for g in gens])))
        else:
            for G in cov(x, q):
                ps = qps(G)
                ys = eqs(x, G)
                out.append(_Cover(disj(ps), ys, (len(ys), sum(self.qcost(g) for g in ps), len(ps),
                                                 ys, [query_key(g) for g in ps])))
        out.sort(key=lambda c: c.score)
        return out

    # -- restricting bound variables

    def rb(self, q: Query) -> Query:
        res = self._rb_memo.get(q)
        if res is None:
            res = self._rb(q)
            self._rb_memo[q] = res
        return res

    def _rb(self, q: Query) -> Query:
        match q:
            case Not(a):
                return self._cp(Not(self.rb(a)))
            case Or(a, b):
                return self._cp(Or(self.rb(a), self.rb(b)))
            case And(a, b):
                return self._cp(And(self.rb(a), self.rb(b)))
            case Exists(x, body):
                work = list(dict.fromkeys(flat_or(self.rb(body))))
                while True:
                    fix = next((d for d in work if x in nongens(d)), None)
                    if fix is None:
                        break
                    choices = self.covers(x, fix)
                    if not choices:
                        raise NotEvaluable(f"variable {x} cannot be restricted in {fix}")
                    c = choices[0]
                    i = work.index(fix)
                    new = [self.restrict(fix, c.gen)]
                    new += [subst_var(fix, x, y) for y in c.partners]
                    new.append(subst_bot(fix, x))
                    rest = work[:i] + work[i + 1:]
                    work = work[:i] + [n for n in dict.fromkeys(new) if n not in rest] + work[i + 1:]
                return self._cp(disj(exists_smart(x, d) for d in work))
        return q

    # -- restricting free variables

    def split(self, q: Query) -> TranslationResult:
        if self.mode == "vgt" and not is_evaluable(q):
            raise NotEvaluable(f"query is not evaluable: {q}")
        target = fv(q)
        fin: list[tuple[Query, frozenset]] = [(self.rb(q), frozenset())]
        inf: list[Query] = []
        while True:
            idx = next((i for i, (d, _) in enumerate(fin) if nongens(d)), None)
            if idx is None:
                break
            fix, e = fin[idx]
            x, c = self._choose(fix)
            new = [(self.restrict(fix, c.gen), e)]
            new += [(subst_var(fix, x, y), e | {(x, y)}) for y in c.partners]
            rest = fin[:idx] + fin[idx + 1:]
            fin = fin[:idx] + [n for n in dict.fromkeys(new) if n not in rest] + fin[idx + 1:]
            bot = subst_bot(fix, x)
            if bot not in inf:
                inf.append(bot)
        kept = []
        for qf, e in fin:
            evars = {v for p in e for v in p}
            if hanging(qf, e) or (fv(qf) | evars) != target:
                moved = qf
                for a, b in sorted(e):
                    moved = And(moved, Eq(a, Var(b)))
                if moved not in inf:
                    inf.append(moved)
            else:
                kept.append((qf, e))
        q_fin = self._cp(disj(sconj_eqs(qf, e) for qf, e in kept))
        q_inf = self.rb(disj(exists_many(fvseq(qi), qi) for qi in inf))
        return TranslationResult(q_fin, self._cp(q_inf))

    def _choose(self, fix: Query) -> tuple[str, _Cover]:
        best = None
        for x in sorted(nongens(fix)):
            for c in self.covers(x, fix)[:1]:
                key = (c.score, x)
                if best is None or key < best[0]:
                    best = (key, x, c)
        if best is None:
            raise NotEvaluable(f"no free variable of {fix} can be restricted")
        return best[1], best[2]

    # -- RANF lowering

    def rw(self, q: Query) -> TranslationResult:
        res = self.split(q)
        norm = Normalizer(self.training)
        return TranslationResult(norm.qry(res.fin), norm.qry(res.inf))


def rb(q: Query, training: Structure | None = None, cp_extra: bool = True) -> Query:
    """Equivalent query over infinite domains whose bound variables are range restricted."""
    return Translator(training, cp_extra=cp_extra).rb(q)


def split(q: Query, training: Structure | None = None, cp_extra: bool = True,
          mode: str = "rc2sql") -> TranslationResult:
    """Safe-range pair ``(fin, inf)`` for ``q``."""
    return Translator(training, mode=mode, cp_extra=cp_extra).split(q)


def rw(q: Query, training: Structure | None = None, mode: str = "rc2sql") -> TranslationResult:
    """``split`` followed by RANF lowering of both components."""
    return Translator(training, mode=mode).rw(q)
