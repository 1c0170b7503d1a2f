import os

import pytest
from hypothesis import HealthCheck, assume, given, settings

from helpers import queries, structures
from rcq import parse_query
from rcq.datagolf import BENCH_QUERIES, INFINITE_QUERIES, golf
from rcq.db import DatabaseError, SqliteDatabase, UrlDatabase, dialect_of_url, open_database
from rcq.pipeline import compile_query
from rcq.ra import Rel, eval_ra, ranf2ra, to_sexpr
from rcq.ranges import is_ranf
from rcq.relation import Relation
from rcq.semantics import Structure, eval_ranf
from rcq.sql import literal, quote, ra2sql, ranf2sql

P = parse_query
S = Structure.of(B={(1,), (2,), ("o'k",)}, P={(1, 3), (2, 4), (2, 5), ("o'k", 3)},
                 S={(3, "u", 7), (4, "u", 7)})
CORPUS = list(BENCH_QUERIES.items()) + list(INFINITE_QUERIES.items())


def run_sql(db, tr, int_columns=False):
    """Rows of a lowered query as computed by ``db``, keyed like :func:`eval_ra`."""
    rows = db.query(ra2sql(tr, db.dialect, int_columns))
    if tr.aux is not None:
        return {()} if rows else set()
    return rows


@pytest.mark.parametrize("text", [
    "B(x) AND NOT EXISTS y. P(x, y) AND NOT B(y)",
    "EXISTS y. P(x, y) AND y = 3",
    "B(x) AND x = y",
    "B(x) AND x = 'o''k'".replace("''", "\\'"),
    "CNT c OVER y. P(x, y)",
    "EXISTS x. B(x)",
    "NOT EXISTS x. B(x) AND x = 9",
    "P(x, y) AND (B(y) OR y = 5)",
    "EXISTS c. (CNT c OVER p. P(b, p)) AND c = 2 AND B(b)",
])
def test_ra_and_sqlite_match_ranf_evaluation(text):
    q = P(text)
    assert is_ranf(q)
    tr = ranf2ra(q)
    want = eval_ranf(q, S)
    assert eval_ra(tr, S).rows == want.rows
    db = SqliteDatabase()
    db.load(S)
    assert run_sql(db, tr) == want.rows
    db.close()


def test_sexpr_mentions_relations():
    text = to_sexpr(ranf2ra(P("B(x) AND NOT EXISTS y. P(x, y)")))
    assert "B" in text and "P" in text


def test_ranf2ra_rejects_non_ranf():
    with pytest.raises(ValueError):
        ranf2ra(P("NOT B(x)"))


def test_dialect_quoting_and_literals():
    assert quote("a\"b", "postgresql") == '"a""b"'
    assert quote("a`b", "mysql") == "`a``b`"
    assert literal(3, "sqlite") == "3"
    assert literal(3, "postgresql") == "'3'"
    assert literal(3, "postgresql", int_columns=True) == "3"
    assert literal("it's", "mysql") == "'it''s'"
    with pytest.raises(ValueError):
        ranf2sql(P("B(x)"), dialect="oracle")


def test_sql_shares_repeated_subexpressions():
    text = ranf2sql(P("(B(x) AND NOT EXISTS y. P(x, y)) OR (B(x) AND x = 2)"))
    assert text.count('FROM "B"') == 1


def test_ordered_output():
    text = ranf2sql(P("P(x, y)"), dialect="sqlite")
    assert text.rstrip(";").endswith('ORDER BY "x", "y"')
    assert "ORDER BY" not in ranf2sql(P("P(x, y)"), order=False)


def test_eval_ra_on_bare_expression():
    assert eval_ra(Rel("P", ("a", "b")), S) == Relation.make(("a", "b"), S.interps["P"])


@pytest.mark.parametrize("name, q", CORPUS, ids=[n for n, _ in CORPUS])
def test_corpus_ra_and_sqlite_agree_with_ranf(name, q):
    c = compile_query(q)
    db = SqliteDatabase()
    try:
        for n in (2, 5):
            for gamma in (0, 1):
                s = golf(q, n, gamma)
                db.load(s)
                for comp, tr in ((c.fin, c.fin_ra), (c.inf, c.inf_ra)):
                    want = eval_ranf(comp, s).reorder(tr.free).rows
                    assert eval_ra(tr, s).rows == want
                    assert run_sql(db, tr) == want
    finally:
        db.close()


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(queries(max_leaves=6), structures())
def test_random_ranf_queries_through_ra_and_sqlite(q, s):
    assume(is_ranf(q))
    tr = ranf2ra(q)
    want = eval_ranf(q, s).reorder(tr.free).rows
    assert eval_ra(tr, s).rows == want
    db = SqliteDatabase()
    db.load(s, {"A": 1, "B": 1, "P": 2, "R": 2})
    assert run_sql(db, tr) == want
    db.close()


def test_dialect_of_url():
    assert dialect_of_url("postgresql+psycopg://u@h/db") == "postgresql"
    assert dialect_of_url("mysql+pymysql://u@h/db") == "mysql"
    assert dialect_of_url("sqlite://") == "sqlite"
    with pytest.raises(DatabaseError):
        dialect_of_url("oracle://h")


def test_open_database_defaults_to_sqlite():
    db = open_database(None)
    assert isinstance(db, SqliteDatabase)
    db.close()


def test_sqlite_errors_become_database_errors():
    db = SqliteDatabase()
    with pytest.raises(DatabaseError):
        db.query("SELECT * FROM missing")
    db.close()


def _url_tier(url, int_columns):
    pytest.importorskip("sqlalchemy")
    db = UrlDatabase(url, int_columns)
    try:
        for name, q in CORPUS[:6]:
            c = compile_query(q)
            s = golf(q, 3, 0)
            db.load(s)
            for comp, tr in ((c.fin, c.fin_ra), (c.inf, c.inf_ra)):
                want = eval_ranf(comp, s).reorder(tr.free).rows
                got = run_sql(db, tr, int_columns)
                if not int_columns and db.dialect != "sqlite":
                    # text columns; counts may come back as numbers
                    want = {tuple(str(a) for a in r) for r in want}
                    got = {tuple(str(a) for a in r) for r in got}
                assert got == want, name
    finally:
        db.close()


def test_sqlalchemy_path_with_sqlite_url():
    _url_tier("sqlite://", False)


@pytest.mark.skipif(not os.environ.get("RCQ_DB_URL"), reason="RCQ_DB_URL not set")
@pytest.mark.parametrize("int_columns", [False, True])
def test_external_database_from_environment(int_columns):
    _url_tier(os.environ["RCQ_DB_URL"], int_columns)
