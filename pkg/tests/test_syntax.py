from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import VARS, extend, queries, same_answers, structures
from rcq import parse_query, to_text
from rcq.parser import QuerySyntaxError
from rcq.semantics import adom, eval_naive
from rcq.syntax import (FALSE, TRUE, And, CntAgg, Const, Eq, Exists, Mul, Not, Or, Pred, Var,
                        av, cp, exists_many, flat_and, flat_or, fresh_var, fv, fvseq,
                        subst_bot, subst_var)
import pytest


def P(text):
    return parse_query(text)


@pytest.mark.parametrize("text", [
    "B(x)",
    "NOT B(x) AND P(x, y)",
    "EXISTS x, y. P(x, y) OR B(3)",
    "x = 'a\\'b'",
    "R(x, 'two words')",
    "CNT c OVER y. P(x, y)",
    "c = a * b",
    "TRUE AND FALSE",
])
def test_print_parse_round_trip(text):
    q = P(text)
    assert P(to_text(q)) == q


def test_precedence_and_binder_scope():
    assert P("A(x) OR B(x) AND R(x, y)") == Or(Pred("A", (Var("x"),)), And(Pred("B", (Var("x"),)), P("R(x, y)")))
    # binder bodies extend to the right
    assert P("EXISTS y. R(x, y) AND B(y)") == Exists("y", And(P("R(x, y)"), P("B(y)")))
    assert P("EXISTS x, y. R(x, y)") == Exists("x", Exists("y", P("R(x, y)")))


def test_forall_and_implication_are_sugar():
    assert P("FORALL p. P(b, p) -> S(p)") == Not(Exists("p", Not(Or(Not(P("P(b, p)")), P("S(p)")))))


def test_constants_and_equalities():
    assert P("x = 3") == Eq("x", Const(3))
    assert P("x = y") == Eq("x", Var("y"))
    assert P("R(x, 'v')").args[1] == Const("v")
    assert P("c = a * b") == Mul("c", "a", "b")
    assert P("CNT c OVER y, z. R(y, z)") == CntAgg("c", ("y", "z"), P("R(y, z)"))


@pytest.mark.parametrize("bad", ["B(x", "EXISTS . B(x)", "B(x) AND", "NOT", "x =", "AND B(x)"])
def test_syntax_errors(bad):
    with pytest.raises(QuerySyntaxError):
        P(bad)


def test_free_and_all_variables():
    q = P("EXISTS y. R(x, y) AND NOT B(z)")
    assert fv(q) == {"x", "z"}
    assert av(q) == {"x", "y", "z"}
    assert fvseq(q) == ("x", "z")
    assert fv(P("CNT c OVER y. R(x, y)")) == {"x", "c"}


def test_fresh_var_counts_up():
    assert fresh_var("c", {"c1", "c2"}) == "c3"
    assert fresh_var("x", ()) == "x1"


def test_exists_many_puts_first_variable_outermost():
    q = exists_many(["a", "b"], P("R(a, b)"))
    assert q == Exists("a", Exists("b", P("R(a, b)")))
    assert exists_many(["z"], P("B(x)")) == P("B(x)")


def test_flatten_dedups():
    assert flat_or(P("B(x) OR A(x) OR B(x)")) == [P("B(x)"), P("A(x)")]
    assert flat_and(P("B(x) AND (A(x) AND B(x))")) == [P("B(x)"), P("A(x)")]


def test_cp_rules():
    assert cp(P("B(x) AND FALSE")) == FALSE
    assert cp(P("B(x) OR TRUE")) == TRUE
    assert cp(P("NOT (x = x)")) == FALSE
    assert cp(P("EXISTS y. FALSE")) == FALSE
    assert cp(P("B(x) AND NOT FALSE")) == P("B(x)")


def test_substitution_avoids_capture():
    q = P("EXISTS y. R(x, y)")
    r = subst_var(q, "x", "y")
    assert fv(r) == {"y"}
    # the bound variable was renamed, so the new free y is distinct from it
    assert isinstance(r, Exists) and r.var != "y"


def test_subst_bot():
    assert subst_bot(P("B(x) OR A(y)"), "x") == P("A(y)")
    assert subst_bot(P("NOT B(x) AND A(y)"), "x") == P("A(y)")


@settings(max_examples=150, deadline=None)
@given(queries())
def test_round_trip_property(q):
    assert parse_query(to_text(q)) == q


@settings(max_examples=100, deadline=None)
@given(queries(), structures())
def test_cp_preserves_semantics(q, s):
    dom = sorted(adom(q, s) | {9}, key=repr)
    # cp may drop free variables (x = x becomes TRUE), so compare cylinders
    assert fv(cp(q)) <= fv(q)
    assert same_answers(eval_naive(q, s, dom), eval_naive(cp(q), s, dom), dom)


@settings(max_examples=100, deadline=None)
@given(queries(), st.sampled_from(VARS), st.sampled_from(VARS), structures())
def test_subst_var_semantics(q, x, y, s):
    """q[x -> y] holds under an assignment exactly when q holds with x set to y's value."""
    r = subst_var(q, x, y)
    dom = sorted(adom(q, s) | {9}, key=repr)
    if x not in fv(q) or x == y:
        return
    cols = tuple(sorted((fv(q) - {x}) | {y}))
    orig = eval_naive(q, s, dom)
    want = set()
    for row in orig.rows:
        val = dict(zip(orig.columns, row))
        if y in val and val[y] != val[x]:
            continue
        val[y] = val[x]
        want.add(tuple(val[c] for c in cols))
    got = eval_naive(r, s, dom)
    assert set(extend(got, cols, dom).rows) == want
