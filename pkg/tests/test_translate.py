import pytest
from hypothesis import HealthCheck, given, settings

from helpers import queries, structures
from rcq import parse_query, to_text
from rcq.bench import example53_query
from rcq.datagolf import BENCH_QUERIES, INFINITE_QUERIES, gen_random_query, golf, training_structure
from rcq.ranges import closeatoms, closeatomseq, is_ranf, is_safe_range
from rcq.semantics import Infinite, capture_oracle, eval_ranf
from rcq.syntax import FALSE, fv
from rcq.translate import NotEvaluable, Translator, eclass, hanging, rb, rw, sconj_eqs, split

P = parse_query
SUSP_USER = P("B(b) AND EXISTS s. NOT EXISTS p. P(b, p) AND NOT S(p, u, s)")

CORPUS = (list(BENCH_QUERIES.values()) + list(INFINITE_QUERIES.values())
          + [gen_random_query(i, 14, "evaluable") for i in range(0, 40, 4)]
          + [gen_random_query(i, 7, "infinite") for i in range(0, 40, 4)])


# ---------------------------------------------------------------- worked examples


def test_rb_of_suspicious_users():
    assert to_text(rb(SUSP_USER)) == (
        "(B(b) AND ((EXISTS s. (NOT (EXISTS p. (P(b, p) AND NOT S(p, u, s))) AND (EXISTS p. S(p, u, s))))"
        " OR NOT (EXISTS p. P(b, p))))")


def test_split_of_suspicious_users():
    r = split(SUSP_USER)
    assert to_text(r.fin) == (
        "((B(b) AND ((EXISTS s. (NOT (EXISTS p. (P(b, p) AND NOT S(p, u, s))) AND (EXISTS p. S(p, u, s))))"
        " OR NOT (EXISTS p. P(b, p)))) AND (EXISTS s, p. S(p, u, s)))")
    assert to_text(r.inf) == "(EXISTS b. (B(b) AND NOT (EXISTS p. P(b, p))))"


@pytest.mark.parametrize("text, fin, inf", [
    ("B(x) OR P2(x, y)", "((B(x) OR P2(x, y)) AND P2(x, y))", "(EXISTS x. B(x))"),
    ("B(x) AND u = v", "FALSE", "(EXISTS x. B(x))"),
    ("NOT B(x)", "FALSE", "TRUE"),
])
def test_split_small_examples(text, fin, inf):
    r = split(P(text))
    assert (to_text(r.fin), to_text(r.inf)) == (fin, inf)


def test_eclass_and_hanging():
    e = {("x", "y"), ("u", "v")}
    assert sorted(map(sorted, eclass(e))) == [["u", "v"], ["x", "y"]]
    assert hanging(P("B(x)"), e) == {"u", "v"}
    assert eclass({("x", "y"), ("y", "z")}) == [frozenset({"x", "y", "z"})]


def test_sconj_eqs_attaches_equalities():
    q = sconj_eqs(P("B(x)"), {("x", "y")})
    assert fv(q) == {"x", "y"} and is_safe_range(q)


def test_vgt_mode_rejects_non_evaluable_queries():
    with pytest.raises(NotEvaluable):
        Translator(mode="vgt").split(SUSP_USER)


def test_vgt_generators_quantify_all_but_one_variable():
    r = Translator(mode="vgt").rw(example53_query())
    extra = {to_text(a) for a in closeatoms(r.fin) - closeatomseq(example53_query())}
    assert "(EXISTS u, p. S(p, u, s))" in extra


def test_unknown_mode():
    with pytest.raises(ValueError):
        Translator(mode="other")


# ---------------------------------------------------------------- invariants on the corpus


@pytest.mark.parametrize("q", CORPUS, ids=to_text)
def test_corpus_free_variables_and_classes(q):
    tr = Translator(training_structure(q))
    s = tr.split(q)
    assert s.fin == FALSE or fv(s.fin) == fv(q)
    assert not fv(s.inf)
    assert is_safe_range(s.fin) and is_safe_range(s.inf)
    r = tr.rw(q)
    assert is_ranf(r.fin) and is_ranf(r.inf)
    assert is_safe_range(r.fin) and is_safe_range(r.inf)


@pytest.mark.parametrize("q", CORPUS[:15], ids=to_text)
def test_corpus_against_oracle(q):
    r = Translator(training_structure(q)).rw(q)
    for n in (2, 4):
        for gamma in (0, 1):
            s = golf(q, n, gamma)
            want = capture_oracle(q, s)
            inf = bool(eval_ranf(r.inf, s))
            assert isinstance(want, Infinite) == inf
            if not inf:
                assert eval_ranf(r.fin, s).rows == want.relation.rows


# ---------------------------------------------------------------- random queries


def _check_pair(q, fin, inf, s):
    want = capture_oracle(q, s)
    holds = bool(eval_ranf(inf, s))
    assert isinstance(want, Infinite) == holds, to_text(q)
    if not holds:
        got = eval_ranf(fin, s)
        if fin == FALSE:
            assert not want.relation.rows
        else:
            assert got.reorder(want.relation.columns).rows == want.relation.rows


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(max_leaves=6), structures())
def test_rw_captures_random_queries(q, s):
    r = rw(q)
    assert is_ranf(r.fin) and is_ranf(r.inf) and not fv(r.inf)
    _check_pair(q, r.fin, r.inf, s)


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(max_leaves=6), structures())
def test_constant_propagation_variant_has_same_semantics(q, s):
    plain = Translator(cp_extra=False).rw(q)
    _check_pair(q, plain.fin, plain.inf, s)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(max_leaves=6), structures())
def test_vgt_mode_agrees_when_it_applies(q, s):
    try:
        r = Translator(mode="vgt").rw(q)
    except NotEvaluable:
        return
    _check_pair(q, r.fin, r.inf, s)


@pytest.mark.parametrize("seed", range(0, 200, 25))
def test_lemma_containment_on_generated_queries(seed):
    # generated queries use pairwise distinct variables
    q = gen_random_query(seed, 14, "evaluable")
    r = Translator(training_structure(q)).rw(q)
    allowed = closeatomseq(q)
    assert closeatoms(r.fin) <= allowed
    assert closeatoms(r.inf) <= allowed
