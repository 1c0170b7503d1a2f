"""The ``rcq`` command line.

Query files hold one query in the textual syntax of :mod:`rcq.parser`;
lines starting with ``#`` are ignored.  Databases are facts files (see
:mod:`rcq.facts`).  Exit status: 0 on success, 1 for query errors (syntax,
untranslatable input), 2 for usage errors, 3 for file and database errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bench import EXPERIMENTS, TOOLS, example53_costs, markdown_report, run_bench, susp_ratios, tsv_report
from .datagolf import gen_random_query, golf
from .facts import FactsError, read_facts, write_facts
from .normalize import sr2ranf_qry, srnf
from .parser import QuerySyntaxError, parse_query
from .pipeline import compile_query, run_compiled
from .printer import to_text
from .ra import to_sexpr
from .ranges import is_allowed, is_evaluable, is_ranf, is_safe_range, nongens
from .relation import BudgetExceeded
from .semantics import Infinite, Structure, capture_oracle
from .sql import DIALECTS
from .syntax import Pred, Query, subqueries
from .translate import NotEvaluable

__all__ = ["main", "build_parser"]


class _IOFailure(Exception):
    pass


def _read_query(path: str) -> Query:
    try:
        text = Path(path).read_text(encoding="utf-8") if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror}") from exc
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    return parse_query("\n".join(lines))


def _read_db(path: str) -> tuple[Structure, dict[str, int]]:
    try:
        return read_facts(path)
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror}") from exc


def _query_arities(q: Query) -> dict[str, int]:
    return {p.name: len(p.args) for p in subqueries(q) if isinstance(p, Pred)}


def _print_rows(rel, out) -> None:
    for r in rel.sorted_rows():
        print("\t".join(str(a) for a in r), file=out)


# ---------------------------------------------------------------- subcommands


def cmd_translate(args, out) -> int:
    q = _read_query(args.query)
    training = _read_db(args.training_db)[0] if args.training_db else None
    c = compile_query(q, training, mode=args.mode, agg=not args.no_agg, cp_extra=not args.no_cp_extra)
    fin_sql, inf_sql = c.sql(args.dialect, args.int_columns, order=not args.no_order)
    print(f"-- fin\n{to_text(c.fin)}\n-- inf\n{to_text(c.inf)}", file=out)
    if args.sql:
        print(f"-- fin.sql\n{fin_sql}\n-- inf.sql\n{inf_sql}", file=out)
    if args.out_dir:
        d = Path(args.out_dir)
        name = args.name or (Path(args.query).stem if args.query != "-" else "query")
        try:
            d.mkdir(parents=True, exist_ok=True)
            for part, query, ra, sql in (("fin", c.fin, c.fin_ra, fin_sql), ("inf", c.inf, c.inf_ra, inf_sql)):
                (d / f"{name}.{part}.rc").write_text(to_text(query) + "\n", encoding="utf-8")
                (d / f"{name}.{part}.ra").write_text(to_sexpr(ra) + "\n", encoding="utf-8")
                (d / f"{name}.{part}.sql").write_text(sql + "\n", encoding="utf-8")
        except OSError as exc:
            raise _IOFailure(f"cannot write to {d}: {exc.strerror}") from exc
    print(f"-- translated in {c.seconds:.3f} s", file=sys.stderr)
    return 0


def cmd_run(args, out) -> int:
    q = _read_query(args.query)
    s, arities = _read_db(args.db)
    arities = {**_query_arities(q), **arities}
    c = compile_query(q, mode=args.mode, agg=not args.no_agg)
    if args.engine == "mem":
        ans = run_compiled(c, s)
        if ans.infinite:
            print("INFINITE", file=out)
        else:
            print("FINITE", file=out)
            _print_rows(ans.rows, out)
        return 0
    from .db import DatabaseError, open_database

    url = args.db_url or os.environ.get("RCQ_DB_URL")
    try:
        db = open_database(url, args.int_columns)
        try:
            db.load(s, arities)
            fin_sql, inf_sql = c.sql(db.dialect, args.int_columns)
            if db.query(inf_sql):
                print("INFINITE", file=out)
                return 0
            rows = db.query(fin_sql)
        finally:
            db.close()
    except (DatabaseError, ImportError) as exc:
        raise _IOFailure(str(exc)) from exc
    from .relation import Relation

    print("FINITE", file=out)
    _print_rows(Relation.make(c.fin_ra.free or (), rows) if c.fin_ra.aux is None else Relation.make((), rows), out)
    return 0


def cmd_eval(args, out) -> int:
    q = _read_query(args.query)
    s = _read_db(args.db)[0]
    if args.oracle:
        res = capture_oracle(q, s)
        if isinstance(res, Infinite):
            print("INFINITE", file=out)
        else:
            print("FINITE", file=out)
            _print_rows(res.relation, out)
        return 0
    ans = run_compiled(compile_query(q), s)
    if ans.infinite:
        print("INFINITE", file=out)
    else:
        print("FINITE", file=out)
        _print_rows(ans.rows, out)
    return 0


def cmd_normalize(args, out) -> int:
    q = _read_query(args.query)
    if args.to == "srnf":
        print(to_text(srnf(q)), file=out)
        return 0
    if not is_safe_range(q):
        print("error: RANF lowering needs a safe-range query; use 'rcq translate' instead", file=sys.stderr)
        return 1
    print(to_text(sr2ranf_qry(srnf(q))), file=out)
    return 0


def cmd_classify(args, out) -> int:
    q = _read_query(args.query)
    flags = [("safe-range", is_safe_range(q)), ("evaluable", is_evaluable(q)),
             ("allowed", is_allowed(q)), ("ranf", is_ranf(q))]
    for name, val in flags:
        print(f"{name}: {'yes' if val else 'no'}", file=out)
    print("nongens: " + " ".join(sorted(nongens(q))), file=out)
    return 0


def cmd_datagolf(args, out) -> int:
    q = _read_query(args.query)
    s = golf(q, args.n, args.strategy)
    arities = _query_arities(q)
    if args.output in (None, "-"):
        write_facts(s, out, arities)
        return 0
    try:
        write_facts(s, args.output, arities)
    except OSError as exc:
        raise _IOFailure(f"cannot write {args.output}: {exc.strerror}") from exc
    return 0


def cmd_genquery(args, out) -> int:
    print(to_text(gen_random_query(args.seed, args.size, args.profile)), file=out)
    return 0


def cmd_bench(args, out) -> int:
    if args.fixed:
        print("| n = m | cost VGT- | cost RC2SQL- | ratio |\n|---|---|---|---|", file=out)
        for n, v, r in example53_costs(tuple(args.sizes)):
            print(f"| {n} | {v} | {r} | {v / r:.2f} |", file=out)
        minus, full = susp_ratios(args.susp_n)
        print(f"\nQsusp on Data Golf n={args.susp_n}: VGT-/RC2SQL- = {minus:.2f}, VGT/RC2SQL = {full:.2f}", file=out)
        return 0
    engines = args.engine
    url = args.db_url or os.environ.get("RCQ_DB_URL")
    if "dbms" in engines and not url:
        print("error: the dbms engine needs --db-url or RCQ_DB_URL", file=sys.stderr)
        return 2

    def progress(cell):
        if args.verbose:
            print(f"{cell.experiment} {cell.query} s={cell.strategy} {cell.tool}^{cell.engine}: "
                  f"{cell.status} {cell.rows}", file=sys.stderr)

    cells = run_bench(args.experiment, args.scale, args.tool, engines, args.timeout, url, args.int_columns,
                      progress)
    text = tsv_report(cells) if args.format == "tsv" else markdown_report(cells, args.metric)
    if args.output and args.output != "-":
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _IOFailure(f"cannot write {args.output}: {exc.strerror}") from exc
    else:
        print(text, file=out, end="" if text.endswith("\n") else "\n")
    return 0


# ---------------------------------------------------------------- argument parsing


def _csv(choices):
    def parse(text: str) -> list[str]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"expected a comma-separated subset of {', '.join(choices)}")
        return items
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rcq", description="Translate relational calculus queries to SQL.")
    sub = p.add_subparsers(dest="command", required=True)

    def translation_opts(sp):
        sp.add_argument("--mode", choices=("rc2sql", "vgt"), default="rc2sql",
                        help="generator choice (vgt accepts evaluable queries only)")
        sp.add_argument("--no-agg", action="store_true", help="skip the count-aggregation rewrites")

    t = sub.add_parser("translate", help="translate a query into a RANF pair, RA and SQL")
    t.add_argument("query", help="query file, or - for stdin")
    t.add_argument("--training-db", help="facts file used to score choices (default: small Data Golf)")
    translation_opts(t)
    t.add_argument("--no-cp-extra", action="store_true", help="no constant propagation between steps")
    t.add_argument("--dialect", choices=DIALECTS, default="postgresql")
    t.add_argument("--int-columns", action="store_true", help="integer literals for integer atoms")
    t.add_argument("--no-order", action="store_true", help="omit ORDER BY")
    t.add_argument("--sql", action="store_true", help="also print the SQL")
    t.add_argument("-o", "--out-dir", help="write NAME.{fin,inf}.{rc,ra,sql} here")
    t.add_argument("--name", help="artifact base name (default: query file stem)")
    t.set_defaults(func=cmd_translate)

    r = sub.add_parser("run", help="evaluate a translated query on a database")
    r.add_argument("query")
    r.add_argument("db", help="facts file")
    translation_opts(r)
    r.add_argument("--engine", choices=("mem", "dbms"), default="mem")
    r.add_argument("--db-url", help="SQLAlchemy URL (default: RCQ_DB_URL, else in-memory SQLite)")
    r.add_argument("--int-columns", action="store_true", help="store integer atoms in integer columns")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="print FINITE and the answers, or INFINITE")
    e.add_argument("query")
    e.add_argument("db", help="facts file")
    e.add_argument("--oracle", action="store_true", help="use the brute-force capturability oracle")
    e.set_defaults(func=cmd_eval)

    n = sub.add_parser("normalize", help="print the SRNF or RANF form of a query")
    n.add_argument("query")
    n.add_argument("--to", choices=("srnf", "ranf"), default="srnf")
    n.set_defaults(func=cmd_normalize)

    c = sub.add_parser("classify", help="print syntactic class flags")
    c.add_argument("query")
    c.set_defaults(func=cmd_classify)

    d = sub.add_parser("datagolf", help="write a Data Golf structure as a facts file")
    d.add_argument("--query", required=True)
    d.add_argument("--n", type=int, default=10)
    d.add_argument("--strategy", type=int, choices=(0, 1), default=1)
    d.add_argument("--seed", type=int, default=0, help="accepted for reproducible scripts; the structure is deterministic")
    d.add_argument("-o", "--output", help="facts file (default: stdout)")
    d.set_defaults(func=cmd_datagolf)

    g = sub.add_parser("genquery", help="print a pseudorandom query")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, default=14)
    g.add_argument("--profile", choices=("evaluable", "infinite"), default="evaluable")
    g.set_defaults(func=cmd_genquery)

    b = sub.add_parser("bench", help="run the benchmark experiments")
    b.add_argument("--experiment", type=_csv(tuple(EXPERIMENTS)), default=["small"])
    b.add_argument("--scale", type=float, default=0.01, help="multiplier for each experiment's n")
    b.add_argument("--tool", type=_csv(tuple(TOOLS)), default=list(TOOLS))
    b.add_argument("--engine", type=_csv(("mem", "sqlite", "dbms")), default=["mem"])
    b.add_argument("--timeout", type=float, default=300.0, help="seconds per cell")
    b.add_argument("--db-url")
    b.add_argument("--int-columns", action="store_true")
    b.add_argument("--format", choices=("markdown", "tsv"), default="markdown")
    b.add_argument("--metric", choices=("wall", "cost", "rows"), default="wall")
    b.add_argument("--fixed", action="store_true", help="only the fixed cost experiments")
    b.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32])
    b.add_argument("--susp-n", type=int, default=20)
    b.add_argument("-v", "--verbose", action="store_true")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except QuerySyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return 1
    except NotEvaluable as exc:
        print(f"not evaluable: {exc}", file=sys.stderr)
        return 1
    except BudgetExceeded as exc:
        print(f"oracle gave up: {exc}", file=sys.stderr)
        return 1
    except FactsError as exc:
        print(f"bad facts file: {exc}", file=sys.stderr)
        return 3
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
