import pytest

from rcq import parse_query, to_text
from rcq.datagolf import (BENCH_QUERIES, INFINITE_QUERIES, Minter, check_dg_assumptions, dg, dgeqs,
                          gen_random_query, golf, golf_varlist, node_count, training_structure)
from rcq.ranges import is_evaluable, is_safe_range
from rcq.semantics import adom, eval_fin_dom, fresh_atoms, width
from rcq.syntax import Exists, Not, fv, fvseq, subqueries

P = parse_query
EXAMPLE = P("NOT EXISTS y. P(x, y) AND NOT R(x, y, z)")
CORPUS = list(BENCH_QUERIES.items()) + list(INFINITE_QUERIES.items())


def test_minter_fills_columns_in_order():
    m = Minter()
    assert m.tuples(("x", "z", "y"), 2) == [(0, 4, 8), (2, 6, 10)]
    assert m.tuples(("x", "y"), 2, {"x", "y"}) == [(12, 12), (14, 14)]


def test_dgeqs_swaps_under_negation():
    assert dgeqs(P("x = y"), 0) == (frozenset({"x", "y"}), frozenset())
    assert dgeqs(P("NOT x = y"), 0) == (frozenset(), frozenset({"x", "y"}))


@pytest.mark.parametrize("gamma, p_rows", [
    (0, {(12, 20), (14, 22), (24, 32), (26, 34)}),
    (1, {(0, 8), (2, 10), (12, 20), (14, 22)}),
])
def test_worked_structure(gamma, p_rows):
    varlist = ("x", "z", "y")
    pos = [(0, 4, 8), (2, 6, 10)]
    neg = [(12, 16, 20), (14, 18, 22)]
    got = dg(EXAMPLE, varlist, pos, neg, gamma)
    assert got["P"] == p_rows
    assert got["R"] == {(0, 8, 4), (2, 10, 6), (24, 32, 28), (26, 34, 30)}


def test_golf_mints_positive_then_negative_tuples():
    s = golf(EXAMPLE, 2, 1, ("x", "z", "y"))
    assert s.interps["P"] == frozenset({(0, 8), (2, 10), (12, 20), (14, 22)})


def _tuples(q, n, gamma):
    varlist = golf_varlist(q)
    vpos, vneg = dgeqs(q, gamma)
    m = Minter()
    return varlist, m.tuples(varlist, n, vpos), m.tuples(varlist, n, vneg)


def _check_contract(q, n, gamma):
    """Whether positive tuples are answers, negative ones are not, and which subqueries are trivial.

    Evaluation is over the active domain, the values of the positive and
    negative tuples and enough fresh values, which is exact for these
    generic queries.  Subqueries with more than three free variables are
    skipped to keep materialization small.  A tuple of distinct fresh values
    that is not an answer stands for infinitely many non-answers.
    """
    s = golf(q, n, gamma)
    varlist, pos, neg = _tuples(q, n, gamma)
    base = adom(q, s) | {v for r in pos + neg for v in r}
    dom = sorted(base, key=repr) + fresh_atoms(base, width(q) + 1)
    answers = eval_fin_dom(q, s, dom).rows
    idx = [varlist.index(v) for v in fvseq(q)]
    proj = lambda rows: {tuple(r[i] for i in idx) for r in rows}
    fresh = tuple(dom[len(base):])

    def is_trivial(sub):
        rows = eval_fin_dom(sub, s, dom).rows
        if len(rows) < n:
            return True
        if fresh[:len(fv(sub))] not in rows:
            return False
        return len(eval_fin_dom(Not(sub), s, dom)) < n

    trivial = [sub for sub in subqueries(q) if 0 < len(fv(sub)) <= 3 and is_trivial(sub)]
    return proj(pos) <= answers, not proj(neg) & answers, trivial


# seeds 0 and 54 are the counterexamples pinned below
CONTRACT = CORPUS + [(f"gen{i}", gen_random_query(i, 14, "evaluable")) for i in range(6, 54, 6)]


@pytest.mark.parametrize("name, q", CONTRACT, ids=[n for n, _ in CONTRACT])
@pytest.mark.parametrize("gamma", [0, 1])
def test_golf_contract(name, q, gamma):
    pos_ok, neg_ok, trivial = _check_contract(q, 2, gamma)
    assert pos_ok and neg_ok
    assert not trivial, [to_text(t) for t in trivial]


@pytest.mark.parametrize("gamma", [0, 1])
def test_assumptions_do_not_rule_out_universal_emptiness(gamma):
    """A universally quantified variable under a negated existential forces a relation to be empty.

    The query reads ``EXISTS x2. FORALL x3. (... AND NOT EXISTS x4. P2(x3, x4)) ...``
    which holds only when P2 is empty, so it has no answers on any structure
    where ``P2`` is nontrivial, even though it meets every syntactic assumption.
    """
    q = gen_random_query(0, 14, "evaluable")
    assert check_dg_assumptions(q)
    pos_ok, neg_ok, trivial = _check_contract(q, 2, gamma)
    assert not pos_ok and neg_ok
    assert q in trivial
    assert golf(q, 2, gamma).interps["P2"]


@pytest.mark.parametrize("name, q", CORPUS, ids=[n for n, _ in CORPUS])
def test_fixed_queries_meet_the_assumptions(name, q):
    assert check_dg_assumptions(q), check_dg_assumptions(q).problems


@pytest.mark.parametrize("text, flag", [
    ("EXISTS y. NOT P(x, y)", "con"),
    ("P(x) AND x = 3", "cst"),
    ("P(x) AND EXISTS y. Q(y)", "var"),
    ("P(x) AND NOT P(x)", "rep"),
])
def test_assumption_violations(text, flag):
    report = check_dg_assumptions(P(text))
    assert not report and not getattr(report, flag) and report.problems


def test_training_structure_is_small():
    q = BENCH_QUERIES["Q1"]
    assert training_structure(q) == golf(q, 2, 1)


@pytest.mark.parametrize("seed", range(0, 200, 20))
def test_generated_evaluable_queries(seed):
    q = gen_random_query(seed, 14, "evaluable")
    assert q == gen_random_query(seed, 14, "evaluable")
    assert node_count(q) == 14 and fv(q) == {"x0", "x1"}
    assert check_dg_assumptions(q)
    assert is_evaluable(q) and not is_safe_range(q)
    assert all(s.var in fv(s.body) for s in subqueries(q) if isinstance(s, Exists))


@pytest.mark.parametrize("seed", range(0, 200, 20))
def test_generated_infinite_queries(seed):
    q = gen_random_query(seed, profile="infinite")
    assert check_dg_assumptions(q) and not is_evaluable(q)
    assert fv(q) == {"x0", "x1"} or fv(q) <= {"x0", "x1"}


def test_generator_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_random_query(0, 14, "other")
    with pytest.raises(ValueError):
        gen_random_query(0, 2)


def test_different_seeds_give_different_queries():
    assert len({gen_random_query(i, 10) for i in range(10)}) > 5
