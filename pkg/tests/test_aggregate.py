import pytest
from hypothesis import HealthCheck, assume, given, settings

from helpers import queries, structures
from rcq import parse_query, to_text
from rcq.aggregate import NoMatch, Counter, apply_hash, apply_hashhash, cnt, mini_scope
from rcq.datagolf import BENCH_QUERIES, INFINITE_QUERIES, golf, training_structure
from rcq.ranges import is_ranf
from rcq.semantics import Structure, cost, eval_ranf
from rcq.translate import Translator

P = parse_query

EX_QUERY = P("Qx(x) AND NOT EXISTS y. Qx(x) AND Qy(y) AND NOT Qxy(x, y)")
EX_STRUCT = Structure.of(Qx={(i,) for i in range(10)}, Qy={(i,) for i in range(10)},
                         Qxy={(i, j) for i in range(10) for j in range(10) if (i + j) % 3})


def test_counting_example_output():
    assert to_text(cnt(EX_QUERY, EX_STRUCT)) == (
        "((Qx(x) AND NOT (Qx(x) AND (EXISTS y. Qy(y)))) OR (EXISTS c1, c2. "
        "(((Qx(x) AND (CNT c1 OVER y. Qy(y))) AND (CNT c2 OVER y. (Qy(y) AND Qxy(x, y)))) AND c1 = c2)))")


def test_counting_example_is_cheaper_and_equivalent():
    r = cnt(EX_QUERY, EX_STRUCT)
    assert eval_ranf(r, EX_STRUCT) == eval_ranf(EX_QUERY, EX_STRUCT)
    assert cost(r, EX_STRUCT) < cost(EX_QUERY, EX_STRUCT)


SITE = P("EXISTS y. Qx(x) AND Qy(y) AND NOT Qxy(x, y)")
SMALL = (EX_STRUCT, Structure.of(Qx={(1,)}, Qy=set(), Qxy=set()),
         Structure.of(Qx={(1,), (2,)}, Qy={(5,)}, Qxy={(1, 5)}))


@pytest.mark.parametrize("rewrite, q", [(apply_hash, SITE), (apply_hashhash, EX_QUERY)])
@pytest.mark.parametrize("scope", [False, True])
def test_rewrites_preserve_answers(rewrite, q, scope):
    r = rewrite(q, scope)
    assert is_ranf(r)
    for s in SMALL:
        got = eval_ranf(r, s)
        assert got.rows == eval_ranf(q, s).reorder(got.columns).rows


def test_rewrite_rejects_other_shapes():
    with pytest.raises(NoMatch):
        apply_hash(P("Qx(x) AND Qy(y)"))
    with pytest.raises(NoMatch):
        apply_hashhash(SITE)


def test_mini_scope_splits_independent_conjuncts():
    q = P("CNT c OVER y. Qx(x) AND Qy(y)")
    r = mini_scope(q)
    assert "Qx(x)" in to_text(r)
    s = Structure.of(Qx={(1,), (2,)}, Qy={(7,), (8,), (9,)})
    assert eval_ranf(r, s).rows == eval_ranf(q, s).reorder(eval_ranf(r, s).columns).rows


def test_mini_scope_product_uses_multiplication():
    q = P("CNT c OVER y, z. Qx(x) AND Qy(y) AND Qz(z)")
    r = mini_scope(q)
    assert "*" in to_text(r)
    s = Structure.of(Qx={(1,)}, Qy={(7,), (8,)}, Qz={(3,), (4,), (5,)})
    assert eval_ranf(r, s).rows == {(6, 1)} == eval_ranf(q, s).rows


CORPUS = list(BENCH_QUERIES.items()) + list(INFINITE_QUERIES.items())


@pytest.mark.parametrize("name, q", CORPUS, ids=[n for n, _ in CORPUS])
@pytest.mark.parametrize("extended", [False, True])
def test_cnt_preserves_translations(name, q, extended):
    training = training_structure(q)
    r = Translator(training).rw(q)
    counter = Counter(training, extended=extended)
    for comp in (r.fin, r.inf):
        opt = counter.cnt(comp)
        assert is_ranf(opt)
        for gamma in (0, 1):
            s = golf(q, 3, gamma)
            a, b = eval_ranf(comp, s), eval_ranf(opt, s)
            assert a.rows == b.reorder(a.columns).rows


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(max_leaves=6), structures(), structures())
def test_cnt_preserves_random_ranf_queries(q, training, s):
    assume(is_ranf(q))
    r = cnt(q, training, extended=True)
    assert is_ranf(r)
    a, b = eval_ranf(q, s), eval_ranf(r, s)
    assert a.rows == b.reorder(a.columns).rows
