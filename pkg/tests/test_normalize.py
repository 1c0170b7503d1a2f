import pytest
from hypothesis import HealthCheck, assume, given, settings

from helpers import queries, same_answers, structures
from rcq import parse_query, to_text
from rcq.datagolf import BENCH_QUERIES
from rcq.normalize import is_srnf, sconj, sr2ranf, sr2ranf_qry, srnf
from rcq.ranges import is_ranf, is_safe_range
from rcq.semantics import adom, eval_naive, eval_ranf, fresh_atoms
from rcq.syntax import av

P = parse_query


@pytest.mark.parametrize("text, want", [
    ("NOT (B(x) AND A(x))", "(NOT B(x) OR NOT A(x))"),
    ("NOT NOT B(x)", "B(x)"),
    ("EXISTS y. B(x) OR R(x, y)", "(B(x) OR (EXISTS y. R(x, y)))"),
    ("EXISTS y. B(x)", "B(x)"),
])
def test_srnf_examples(text, want):
    assert to_text(srnf(P(text))) == want


def test_sconj_orders_positive_equalities_negations():
    q = sconj([P("NOT A(y)"), P("x = y"), P("B(x)")])
    assert to_text(q) == "((B(x) AND x = y) AND NOT A(y))"
    assert is_ranf(q)


def test_sr2ranf_lowers_a_safe_range_query():
    q = srnf(P("B(x) AND (NOT A(x) OR R(x, y)) AND P(x, y)"))
    assert is_safe_range(q) and not is_ranf(q)
    assert is_ranf(sr2ranf_qry(q))


def test_sr2ranf_reports_used_restrictors():
    q = P("x = y")
    r, used = sr2ranf(q, [P("B(x)")])
    assert is_ranf(r)
    assert used <= {P("B(x)")}


def _dom(q, s):
    return sorted(adom(q, s), key=repr) + fresh_atoms(set(), len(av(q)) + 1)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(), structures())
def test_srnf_is_equivalent_and_normal(q, s):
    r = srnf(q)
    assert is_srnf(r)
    dom = _dom(q, s)
    assert same_answers(eval_naive(q, s, dom), eval_naive(r, s, dom), dom)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(), structures())
def test_sr2ranf_is_equivalent_on_safe_range_queries(q, s):
    n = srnf(q)
    assume(is_safe_range(n))
    r = sr2ranf_qry(n)
    assert is_ranf(r)
    dom = _dom(q, s)
    assert same_answers(eval_ranf(r, s), eval_naive(q, s, dom), dom)


@pytest.mark.parametrize("name", sorted(BENCH_QUERIES))
def test_bench_queries_srnf_round_trip(name):
    q = BENCH_QUERIES[name]
    assert is_srnf(srnf(srnf(q)))
    assert srnf(srnf(q)) == srnf(q)
