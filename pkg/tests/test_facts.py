import pytest
from hypothesis import given
from hypothesis import strategies as st

from rcq.facts import FactsError, arities_of, format_facts, parse_facts, read_facts, write_facts
from rcq.semantics import Structure

TEXT = """
# brands and products
B(1).
B('acme').
P(1, 'it''s').
@arity S 3
"""


def test_parse_values_comments_and_declarations():
    s, ar = parse_facts(TEXT)
    assert s.interps["B"] == {(1,), ("acme",)}
    assert s.interps["P"] == {(1, "it's")}
    assert s.interps["S"] == frozenset()
    assert ar == {"B": 1, "P": 2, "S": 3}


def test_format_is_sorted_and_declares_empty_relations():
    s, ar = parse_facts(TEXT)
    assert format_facts(s, ar) == "B(1).\nB('acme').\nP(1, 'it''s').\n@arity S 3\n"


def test_zero_arity_fact():
    s, ar = parse_facts("Flag().")
    assert s.interps["Flag"] == {()} and ar == {"Flag": 0}


@pytest.mark.parametrize("text", [
    "B(1)",
    "B(1, ).",
    "B(x).",
    "B(1).\nB(1, 2).",
    "@arity B 1\n@arity B 2",
    "B('open).",
    "1B(2).",
])
def test_malformed_files(text):
    with pytest.raises(FactsError):
        parse_facts(text)


def test_error_mentions_line_number():
    with pytest.raises(FactsError, match="line 2"):
        parse_facts("B(1).\nB(1, 2).")


def test_file_round_trip(tmp_path):
    s, ar = parse_facts(TEXT)
    path = tmp_path / "db.facts"
    write_facts(s, str(path), ar)
    assert read_facts(str(path)) == (s, ar)


def test_arities_of_prefers_declared_arities():
    s = Structure.of(B={(1,)})
    assert arities_of(s, {"S": 3}) == {"S": 3, "B": 1}


atoms = st.one_of(st.integers(-1000, 1000), st.text(alphabet="ab' ,().#x", max_size=5))
tables = st.dictionaries(st.sampled_from(["A", "B", "Rel_2"]),
                         st.integers(0, 3).flatmap(lambda k: st.frozensets(st.tuples(*[atoms] * k), max_size=4)))


@given(tables)
def test_round_trip_property(t):
    s = Structure(t)
    ar = {name: (len(next(iter(rows))) if rows else 1) for name, rows in t.items()}
    s2, ar2 = parse_facts(format_facts(s, ar))
    assert {k: v for k, v in s2.interps.items() if v} == {k: v for k, v in t.items() if v}
