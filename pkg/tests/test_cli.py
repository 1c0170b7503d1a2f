import io
import subprocess
import sys

import pytest

from rcq.cli import main

SUSP = "B(b) AND EXISTS u, s. FORALL p. P(b, p) -> S(p, u, s)\n"
SUSP_USER = "# per user\nB(b) AND EXISTS s. NOT EXISTS p. P(b, p) AND NOT S(p, u, s)\n"
DB = "B(1).\nB(2).\nP(1, 3).\nP(2, 4).\nS(3, 'u', 7).\nS(4, 'u', 7).\nS(3, 'v', 8).\n"


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in (("susp.rc", SUSP), ("user.rc", SUSP_USER), ("db.facts", DB),
                       ("notb.rc", "NOT B(x)\n"), ("bad.rc", "B(x) AND\n"), ("bad.facts", "B(1\n")):
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    return paths


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_translate_writes_artifacts(files, tmp_path):
    code, text = run("translate", files["user.rc"], "--sql", "-o", str(tmp_path / "out"), "--dialect", "sqlite")
    assert code == 0
    assert "-- fin" in text and "-- inf.sql" in text
    names = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert names == [f"user.{c}.{e}" for c in ("fin", "inf") for e in ("ra", "rc", "sql")]


def test_vgt_mode_rejects_user_variant(files):
    assert run("translate", files["user.rc"], "--mode", "vgt")[0] == 1


def test_run_and_eval_agree(files):
    mem = run("run", files["user.rc"], files["db.facts"])
    dbms = run("run", files["user.rc"], files["db.facts"], "--engine", "dbms", "--db-url", "sqlite://")
    plain = run("run", files["user.rc"], files["db.facts"], "--engine", "dbms")
    oracle = run("eval", files["user.rc"], files["db.facts"], "--oracle")
    ev = run("eval", files["user.rc"], files["db.facts"])
    assert mem == dbms == plain == oracle == ev == (0, "FINITE\n1\tu\n1\tv\n2\tu\n")


def test_closed_query_prints_one_empty_row(files):
    assert run("run", files["susp.rc"], files["db.facts"]) == (0, "FINITE\n1\n2\n")


def test_infinite_answer(files):
    assert run("eval", files["notb.rc"], files["db.facts"]) == (0, "INFINITE\n")
    assert run("run", files["notb.rc"], files["db.facts"], "--engine", "dbms") == (0, "INFINITE\n")


def test_normalize_and_classify(files):
    assert run("normalize", files["notb.rc"]) == (0, "NOT B(x)\n")
    assert run("normalize", files["notb.rc"], "--to", "ranf")[0] == 1
    code, text = run("classify", files["user.rc"])
    assert code == 0
    assert "safe-range: no" in text and "evaluable: no" in text


def test_datagolf_and_genquery(files, tmp_path):
    code, text = run("datagolf", "--query", files["user.rc"], "--n", "2")
    assert code == 0 and text.startswith("B(")
    target = tmp_path / "golf.facts"
    assert run("datagolf", "--query", files["user.rc"], "--n", "2", "-o", str(target))[0] == 0
    assert target.read_text() == text
    a, b = run("genquery", "--seed", "3"), run("genquery", "--seed", "3")
    assert a == b and a[0] == 0


def test_error_exit_codes(files):
    assert run("classify", files["bad.rc"])[0] == 1
    assert run("eval", files["notb.rc"], files["bad.facts"])[0] == 3
    assert run("eval", files["notb.rc"], files["db.facts"] + ".missing")[0] == 3
    with pytest.raises(SystemExit) as exc:
        run("translate")
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        run("bench", "--tool", "nope")


def test_bench_fixed_costs():
    code, text = run("bench", "--fixed", "--sizes", "4", "8", "--susp-n", "4")
    assert code == 0 and "| 8 |" in text and "VGT-/RC2SQL-" in text


def test_bench_small_table(tmp_path):
    code, text = run("bench", "--experiment", "infinite", "--scale", "0.0005", "--tool", "RC2SQL,VGT",
                     "--engine", "mem,sqlite", "--timeout", "60", "--format", "tsv")
    assert code == 0
    lines = text.strip().splitlines()
    assert len(lines) > 1 and "\t" in lines[0]


def test_dbms_engine_needs_url(monkeypatch):
    monkeypatch.delenv("RCQ_DB_URL", raising=False)
    assert run("bench", "--engine", "dbms")[0] == 2


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "rcq", "classify", files["notb.rc"]],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "ranf: no" in res.stdout
