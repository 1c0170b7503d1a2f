"""Data Golf: structures on which a query and all of its subqueries are nontrivial.

Given a query ``q`` and two sets of tuples over its variables, :func:`dg`
builds a structure that satisfies the query on every positive tuple and
falsifies it on every negative one.  Along the way, each binary connective
gets extra tuples so that neither operand is empty or full.

Values are minted as even integers counting up from 0.  Each tuple set is
filled column by column in ``varlist`` order, so a set of ``k`` tuples takes
the next ``k`` values for its first variable, then the next ``k`` for its
second, and so on.  Variables that must share a value (see :func:`dgeqs`)
copy the value of the first of them.

The module also holds the pseudorandom query generator used for
benchmarking and property tests, and the fixed benchmark queries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .parser import parse_query
from .ranges import is_evaluable, is_safe_range, vgt_con
from .semantics import Structure
from .syntax import (And, Bot, Const, Eq, Exists, Not, Or, Pred, Query, Top,
                     Var, av, fv, fvseq, subqueries)

__all__ = [
    "dgeqs", "dg", "Minter", "golf", "training_structure",
    "check_dg_assumptions", "AssumptionReport", "gen_random_query",
    "node_count", "BENCH_QUERIES", "INFINITE_QUERIES", "golf_varlist",
]


# ---------------------------------------------------------------- equalities


def dgeqs(q: Query, gamma: int) -> tuple[frozenset, frozenset]:
    """Variables that must share a value in the positive and in the negative tuples."""
    match q:
        case Eq(x, Var(y)):
            return frozenset({x, y}), frozenset()
        case Not(a):
            p, n = dgeqs(a, gamma)
            return n, p
        case And(a, b) | Or(a, b):
            p1, n1 = dgeqs(a, gamma)
            p2, n2 = dgeqs(b, gamma)
            if gamma == 0:
                return p1 | p2, n1 | n2
            if isinstance(q, Or):
                return p1 | n2, n1 | n2
            return p1 | p2, p1 | n2
        case Exists(_, body):
            return dgeqs(body, gamma)
    return frozenset(), frozenset()


# ---------------------------------------------------------------- structures


class Minter:
    """Hands out fresh even integers and builds tuple sets from them."""

    def __init__(self, start: int = 0):
        self.next_value = start

    def value(self) -> int:
        v = self.next_value
        self.next_value += 2
        return v

    def tuples(self, varlist: Sequence[str], count: int, same: Iterable[str] = ()) -> list[tuple]:
        same = [v for v in varlist if v in set(same)]
        cols: dict[str, list[int]] = {}
        for v in varlist:
            if same and v in same and v != same[0]:
                continue
            cols[v] = [self.value() for _ in range(count)]
        for v in same[1:]:
            cols[v] = cols[same[0]]
        return [tuple(cols[v][i] for v in varlist) for i in range(count)]


def _embed(rows: Iterable[tuple], varlist: Sequence[str], terms: Sequence) -> set[tuple]:
    idx = {v: i for i, v in enumerate(varlist)}
    out = set()
    for r in rows:
        out.add(tuple(r[idx[t.name]] if isinstance(t, Var) else t.value for t in terms))
    return out


def dg(q: Query, varlist: Sequence[str], pos: Sequence[tuple], neg: Sequence[tuple],
       gamma: int, minter: Minter | None = None) -> dict[str, set[tuple]]:
    """Interpretations making ``pos`` satisfy ``q`` and ``neg`` falsify it.

    ``minter`` supplies values for the auxiliary tuple sets; by default it
    continues after the largest integer in ``pos`` and ``neg``.
    """
    if minter is None:
        top = max((a for r in list(pos) + list(neg) for a in r if isinstance(a, int)), default=-2)
        minter = Minter(top + 2 + (top % 2))
    out: dict[str, set[tuple]] = {}
    _dg(q, tuple(varlist), list(pos), list(neg), gamma, minter, out)
    return out


def _dg(q, varlist, pos, neg, gamma, minter, out):
    match q:
        case Pred(name, args):
            out.setdefault(name, set()).update(_embed(pos, varlist, args))
        case Not(a):
            _dg(a, varlist, neg, pos, gamma, minter, out)
        case And(a, b) | Or(a, b):
            p1, n1 = dgeqs(a, gamma)
            p2, n2 = dgeqs(b, gamma)
            if gamma == 0:
                v1, v2 = p1 | n2, n1 | p2
            elif isinstance(q, And):
                v1, v2 = n1 | n2, n1 | p2
            else:
                v1, v2 = p1 | p2, n1 | p2
            k = min(len(pos), len(neg))
            t1 = minter.tuples(varlist, k, v1)
            t2 = minter.tuples(varlist, k, v2)
            if gamma == 0:
                _dg(a, varlist, pos + t1, neg + t2, gamma, minter, out)
                _dg(b, varlist, pos + t2, neg + t1, gamma, minter, out)
            elif isinstance(q, Or):
                _dg(a, varlist, pos + t1, neg + t2, gamma, minter, out)
                _dg(b, varlist, t1 + t2, neg + pos, gamma, minter, out)
            else:
                _dg(a, varlist, pos + neg, t1 + t2, gamma, minter, out)
                _dg(b, varlist, pos + t2, neg + t1, gamma, minter, out)
        case Exists(_, body):
            _dg(body, varlist, pos, neg, gamma, minter, out)


def golf_varlist(q: Query) -> tuple[str, ...]:
    """Free variables in order, then the remaining variables sorted."""
    free = fvseq(q)
    return free + tuple(sorted(av(q) - set(free)))


def golf(q: Query, n: int, gamma: int, varlist: Sequence[str] | None = None) -> Structure:
    """Data Golf structure with ``n`` positive and ``n`` negative tuples.

    The positive tuples are minted first, then the negative ones, then the
    auxiliary sets in the order the recursion needs them.
    """
    varlist = tuple(varlist) if varlist is not None else golf_varlist(q)
    vpos, vneg = dgeqs(q, gamma)
    m = Minter()
    pos = m.tuples(varlist, n, vpos)
    neg = m.tuples(varlist, n, vneg)
    tables = dg(q, varlist, pos, neg, gamma, m)
    return Structure({k: frozenset(v) for k, v in tables.items()})


def training_structure(q: Query, gamma: int = 1) -> Structure:
    """The small structure used to score translation choices (two positive, two negative tuples)."""
    return golf(q, 2, gamma)


# ---------------------------------------------------------------- assumptions


@dataclass
class AssumptionReport:
    con: bool
    cst: bool
    var: bool
    rep: bool
    problems: list[str]

    def __bool__(self) -> bool:
        return self.con and self.cst and self.var and self.rep


def check_dg_assumptions(q: Query) -> AssumptionReport:
    """Check the four syntactic conditions under which :func:`dg` meets its contract."""
    problems = []
    con = True
    for sub in subqueries(q):
        if isinstance(sub, Exists):
            ok = any(all({sub.var} < fv(a) for a in A) for A in vgt_con(sub.var, sub.body))
            if not ok:
                con = False
                problems.append(f"CON: no admissible constraining atoms for {sub.var} in {sub}")
    cst = True
    for sub in subqueries(q):
        if isinstance(sub, Eq) and isinstance(sub.rhs, Const):
            cst = False
            problems.append(f"CST: equality with a constant {sub}")
    var = True
    for sub in subqueries(q):
        if not fv(sub):
            var = False
            problems.append(f"VAR: closed subquery {sub}")
            break
    rep = True
    names: set[str] = set()
    eq_vars: set[str] = set()
    for sub in subqueries(q):
        if isinstance(sub, Pred):
            if sub.name in names:
                rep = False
                problems.append(f"REP: predicate {sub.name} occurs twice")
            names.add(sub.name)
        elif isinstance(sub, Eq) and isinstance(sub.rhs, Var):
            vs = {sub.lhs, sub.rhs.name}
            if vs & eq_vars:
                rep = False
                problems.append(f"REP: equalities share a variable at {sub}")
            eq_vars |= vs
    return AssumptionReport(con, cst, var, rep, problems)


# ---------------------------------------------------------------- random queries


def node_count(q: Query) -> int:
    """Number of syntax tree nodes (each binder counts once per variable)."""
    return sum(1 for _ in subqueries(q))


_LETTERS = "PQRSTUVW"


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: dict[int, int] = {}
        self.eq_vars: set[str] = set()
        self.next_bound = 2

    def pred(self, vs: Sequence[str]) -> Query:
        k = len(vs)
        i = self.used.get(k, 0)
        self.used[k] = i + 1
        name = f"{_LETTERS[i % len(_LETTERS)]}{k}" if i < len(_LETTERS) else f"{_LETTERS[i % len(_LETTERS)]}{k}_{i}"
        args = list(vs)
        self.rng.shuffle(args)
        return Pred(name, tuple(Var(v) for v in args))

    def atom(self, vs: frozenset) -> Query:
        vs = sorted(vs)
        if len(vs) == 2 and not (set(vs) & self.eq_vars) and self.rng.random() < 0.25:
            self.eq_vars |= set(vs)
            x, y = vs
            return Eq(x, Var(y))
        return self.pred(vs)

    def query(self, n: int, vs: frozenset, neg_ok: bool = True) -> Query:
        """A query with ``n`` nodes and exactly the free variables ``vs``."""
        if n == 1:
            return self.atom(vs)
        choices = []
        if neg_ok:
            choices.append("not")
        if len(vs) < 4:
            choices.append("exists")
        if n >= 3:
            choices += ["and", "and"]
        if not choices:
            return self.atom(vs)
        c = self.rng.choice(choices)
        if c == "not":
            return Not(self.query(n - 1, vs, neg_ok=False))
        if c == "exists":
            y = f"x{self.next_bound}"
            self.next_bound += 1
            return Exists(y, self.query(n - 1, vs | {y}))
        a = self.rng.randint(1, n - 2)
        b = n - 1 - a
        order = sorted(vs)
        self.rng.shuffle(order)
        cut = self.rng.randint(0, len(order))
        left, right = set(order[:cut]), set(order[cut:])
        # every side needs a variable; share one when a side would be empty
        if not left:
            left = {self.rng.choice(order)}
        if not right:
            right = {self.rng.choice(order)}
        if self.rng.random() < 0.5:
            extra = self.rng.choice(order)
            (left if self.rng.random() < 0.5 else right).add(extra)
        return And(self.query(a, frozenset(left)), self.query(b, frozenset(right)))


def _max_fv(q: Query) -> int:
    return max(len(fv(s)) for s in subqueries(q))


def _bound_occurs(q: Query) -> bool:
    return all(s.var in fv(s.body) for s in subqueries(q) if isinstance(s, Exists))


def gen_random_query(seed: int, size: int = 14, profile: str = "evaluable",
                     max_tries: int = 100_000) -> Query:
    """Deterministic pseudorandom query.

    ``evaluable`` queries have ``size`` nodes, free variables ``x0`` and
    ``x1``, satisfy the Data Golf assumptions, use pairwise distinct
    variables in every atom, have disjunction at most at the top and are
    evaluable but not safe range.  ``infinite`` queries have the fixed shape
    ``A AND NOT EXISTS x2, x3. (B AND NOT C)`` with atoms or an equality
    ``A``, ``B``, ``C``; they are not evaluable, and ``size`` is ignored.
    """
    rng = random.Random(seed)
    if profile == "infinite":
        return _infinite_query(rng, max_tries)
    if profile != "evaluable":
        raise ValueError(f"unknown profile {profile!r}")
    if size < 3:
        raise ValueError("size must be at least 3")
    free = frozenset({"x0", "x1"})
    for _ in range(max_tries):
        g = _Gen(rng)
        if rng.random() < 0.3 and size >= 5:
            a = rng.randint(2, size - 3)
            q = Or(g.query(a, free), g.query(size - 1 - a, free))
        else:
            q = g.query(size, free)
        if (node_count(q) == size and fv(q) == free and _max_fv(q) <= 4 and _bound_occurs(q)
                and check_dg_assumptions(q) and is_evaluable(q) and not is_safe_range(q)):
            return q
    raise RuntimeError(f"no query found for seed {seed} and size {size}")


def _infinite_query(rng: random.Random, max_tries: int) -> Query:
    for _ in range(max_tries):
        g = _Gen(rng)
        a, other = rng.sample(["x0", "x1"], 2)
        q1 = g.pred([a])
        q2 = g.pred([a, "x2", "x3"])
        if rng.random() < 0.4:
            q3 = Eq(other, Var(rng.choice(["x2", "x3"])))
            if rng.random() < 0.5:
                q3 = Eq(q3.rhs.name, Var(other))
        else:
            extra = rng.sample([a, "x2", "x3"], rng.randint(1, 3))
            q3 = g.pred([other, *extra])
        q = And(q1, Not(Exists("x2", Exists("x3", And(q2, Not(q3))))))
        if check_dg_assumptions(q) and not is_evaluable(q):
            return q
    raise RuntimeError("no infinite-profile query found")


# ---------------------------------------------------------------- fixed benchmark queries


_BENCH_TEXT = {
    "Q1": "NOT (EXISTS x2. NOT (EXISTS x3. (P3(x1, x0, x3) AND NOT (EXISTS x4. P4(x1, x3, x4, x2)) "
          "AND (EXISTS x4. P2(x1, x4))))) OR Q2(x1, x0)",
    "Q2": "NOT (EXISTS x2. NOT (EXISTS x3. (NOT P4(x1, x0, x2, x3)) AND P3(x1, x3, x0))) "
          "AND (EXISTS x2. EXISTS x3. (x1 = x2) AND Q3(x0, x2, x3))",
    "Q3": "(EXISTS x2. NOT (EXISTS x3. (P3(x1, x0, x3) AND P1(x0)) AND ((x0 = x1) AND NOT P4(x1, x2, x3, x0)))) "
          "AND (EXISTS x2. Q3(x1, x2, x0))",
    "Q4": "(EXISTS x2. P3(x1, x2, x0)) AND (NOT (x0 = x1)) "
          "AND (NOT (EXISTS x2. NOT (EXISTS x3. P2(x0, x3) AND NOT P4(x1, x3, x2, x0))))",
    "Q5": "(EXISTS x2. EXISTS x3. NOT (EXISTS x4. (EXISTS x5. P3(x0, x5, x4)) AND NOT P4(x0, x4, x2, x3))) "
          "AND ((NOT (x0 = x1)) AND P2(x0, x1))",
    "Q6": "(EXISTS x2. NOT (EXISTS x3. ((NOT (EXISTS x4. P3(x0, x3, x4))) AND Q3(x0, x1, x3)) "
          "AND NOT R3(x0, x2, x1))) AND (EXISTS x2. S3(x0, x1, x2))",
    "Q7": "(EXISTS x2. P3(x0, x2, x1) AND (x0 = x2)) "
          "AND (EXISTS x2. NOT (EXISTS x3. (NOT (EXISTS x4. EXISTS x5. P4(x0, x2, x5, x4))) AND P2(x1, x3)))",
    "Q8": "NOT (EXISTS x2. NOT (EXISTS x3. (EXISTS x4. P3(x0, x3, x1) AND (P4(x0, x3, x1, x4) AND (x3 = x4))) "
          "AND NOT (EXISTS x4. Q4(x0, x4, x3, x2))))",
    "Q9": "P2(x1, x0) AND (EXISTS x2. NOT (EXISTS x3. ((NOT P4(x1, x3, x2, x0)) AND P3(x0, x3, x1)) "
          "AND NOT Q2(x0, x3))) AND (x0 = x1)",
    "Q10": "(EXISTS x2. P3(x1, x2, x0)) OR (NOT (EXISTS x2. NOT (EXISTS x3. (NOT P2(x1, x2)) "
           "AND (EXISTS x4. P1(x0) AND P4(x0, x3, x1, x4)))))",
}

_INFINITE_TEXT = {
    "QI1": "P1(x0) AND NOT (EXISTS x2. EXISTS x3. (P3(x0, x2, x3) AND NOT (x0 = x1)))",
    "QI2": "P1(x0) AND NOT (EXISTS x2. EXISTS x3. (P3(x0, x2, x3) AND NOT P2(x1, x3)))",
    "QI3": "P1(x0) AND NOT (EXISTS x2. EXISTS x3. (P3(x0, x3, x2) AND NOT (x1 = x2)))",
    "QI4": "P1(x1) AND NOT (EXISTS x2. EXISTS x3. (P3(x1, x3, x2) AND NOT P4(x1, x0, x3, x2)))",
    "QI5": "P1(x0) AND NOT (EXISTS x2. EXISTS x3. (P3(x0, x2, x3) AND NOT Q3(x1, x2, x3)))",
}

BENCH_QUERIES: dict[str, Query] = {k: parse_query(v) for k, v in _BENCH_TEXT.items()}
INFINITE_QUERIES: dict[str, Query] = {k: parse_query(v) for k, v in _INFINITE_TEXT.items()}
