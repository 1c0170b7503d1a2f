"""Shared hypothesis strategies and brute-force oracles for the test suite."""

from __future__ import annotations

from hypothesis import strategies as st

from rcq.semantics import Structure, adom, eval_naive, fresh_atoms
from rcq.syntax import And, Const, Eq, Exists, Not, Or, Pred, Query, Var, fv

VARS = ("x", "y", "z")
ARITIES = {"A": 1, "B": 1, "P": 2, "R": 2}


def _atom(draw_vars, name):
    return Pred(name, tuple(Var(v) for v in draw_vars))


@st.composite
def atoms(draw, variables=VARS):
    kind = draw(st.sampled_from(["pred", "pred", "pred", "eq", "eqc"]))
    if kind == "pred":
        name = draw(st.sampled_from(sorted(ARITIES)))
        args = draw(st.lists(st.sampled_from(variables), min_size=ARITIES[name], max_size=ARITIES[name]))
        return _atom(args, name)
    x = draw(st.sampled_from(variables))
    if kind == "eqc":
        return Eq(x, Const(draw(st.integers(0, 2))))
    return Eq(x, Var(draw(st.sampled_from(variables))))


def queries(max_leaves: int = 6, variables=VARS) -> st.SearchStrategy[Query]:
    """Small queries over ``A/1, B/1, P/2, R/2`` and the variables ``x, y, z``."""
    return st.recursive(
        atoms(variables),
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Exists, st.sampled_from(variables), sub),
        ),
        max_leaves=max_leaves,
    )


@st.composite
def structures(draw, values=(0, 1, 2, 3)):
    vals = st.sampled_from(values)
    tables = {}
    for name, k in ARITIES.items():
        tables[name] = draw(st.frozensets(st.tuples(*[vals] * k), max_size=5))
    return Structure(tables)


def naive_capture(q: Query, s: Structure):
    """Brute-force capturability: enumerate assignments over the active domain plus fresh atoms.

    Returns None for an infinite answer set, else the set of answer rows in
    ``fvseq`` order.  Uses one fresh atom per variable of ``q`` plus one, so
    it is sound for any query but slow.
    """
    from rcq.syntax import av

    base = adom(q, s)
    fresh = fresh_atoms(base, len(av(q) | fv(q)) + 1)
    rel = eval_naive(q, s, sorted(base, key=repr) + fresh, budget=10**7)
    if any(a in set(fresh) for r in rel.rows for a in r):
        return None
    return set(rel.rows)


def extend(rel, cols, dom):
    """Cylindrical extension of ``rel`` to the columns ``cols`` over ``dom``, reordered to ``cols``."""
    from itertools import product

    from rcq.relation import Relation

    missing = [c for c in cols if c not in rel.columns]
    allcols = rel.columns + tuple(missing)
    rows = {r + m for r in rel.rows for m in product(dom, repeat=len(missing))}
    return Relation.make(allcols, rows).reorder(cols)


def same_answers(a, b, dom) -> bool:
    """Equal as relations over the union of their columns (missing columns range over ``dom``)."""
    cols = tuple(sorted(set(a.columns) | set(b.columns)))
    return extend(a, cols, dom).rows == extend(b, cols, dom).rows
