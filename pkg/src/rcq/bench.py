"""Desk-scale benchmark runner and the fixed cost experiments.

A benchmark *cell* is one query on one Data Golf structure, evaluated by
one tool (``RC2SQL`` or ``VGT``, each with and without the count
aggregation step, the ``-`` variants) on one engine (``mem`` for the
in-memory RANF evaluator, ``sqlite``, or ``dbms`` for a SQLAlchemy URL).
Every cell runs in a child process that is killed at the timeout, so a
runaway Cartesian product shows up as ``TO`` instead of hanging the run.

Costs and row counts are deterministic; wall-clock columns are not.
"""

from __future__ import annotations

import csv
import io
import multiprocessing as mp
import time
from dataclasses import asdict, dataclass, fields

from .datagolf import BENCH_QUERIES, INFINITE_QUERIES, golf
from .parser import parse_query
from .pipeline import Compiled, compile_query, pair_cost, run_compiled
from .semantics import Structure, cost
from .syntax import Query
from .translate import NotEvaluable

__all__ = [
    "SUSP_QUERIES", "EXPERIMENTS", "TOOLS", "Cell", "example53_query", "example53_structure",
    "example53_costs", "susp_ratios", "run_bench", "markdown_report", "tsv_report",
]

SUSP_QUERIES: dict[str, Query] = {
    "Qsusp": parse_query("B(b) AND EXISTS u, s. FORALL p. P(b, p) -> S(p, u, s)"),
    "Qsusp_user": parse_query("B(b) AND EXISTS s. FORALL p. P(b, p) -> S(p, u, s)"),
    "Qsusp_text": parse_query("B(b) AND EXISTS u, s, t. FORALL p. P(b, p) -> S(p, u, s) OR T(p, u, t)"),
}

# tool name -> (translation mode, count aggregation)
TOOLS = {
    "RC2SQL": ("rc2sql", True),
    "RC2SQL-": ("rc2sql", False),
    "VGT": ("vgt", True),
    "VGT-": ("vgt", False),
}

# experiment -> (queries, Data Golf n before scaling, strategies)
EXPERIMENTS = {
    "small": (BENCH_QUERIES, 500, (1,)),
    "medium": (BENCH_QUERIES, 20000, (1,)),
    "infinite": (INFINITE_QUERIES, 4000, (0, 1)),
    "susp": (SUSP_QUERIES, 1000, (1,)),
}


# ---------------------------------------------------------------- fixed cost experiments


def example53_query() -> Query:
    """The suspicious-brands query with the universal quantifier spelled out."""
    return parse_query("B(b) AND EXISTS u, s. NOT EXISTS p. P(b, p) AND NOT S(p, u, s)")


def example53_structure(n: int, m: int) -> Structure:
    """``B = {c}``, ``P = {(c, c)}`` for ``c <= n`` and ``S = {(c, d, d)}`` for ``c <= n, d <= m``."""
    return Structure.of(
        B={(c,) for c in range(1, n + 1)},
        P={(c, c) for c in range(1, n + 1)},
        S={(c, d, d) for c in range(1, n + 1) for d in range(1, m + 1)},
    )


def example53_costs(sizes=(8, 16, 32)) -> list[tuple[int, int, int]]:
    """``(n, cost of the VGT translation, cost of ours)`` with ``n = m``, both without counting."""
    q = example53_query()
    training = example53_structure(2, 2)
    vgt = compile_query(q, training, mode="vgt", agg=False)
    ours = compile_query(q, training, mode="rc2sql", agg=False)
    out = []
    for n in sizes:
        s = example53_structure(n, n)
        out.append((n, pair_cost(vgt, s), pair_cost(ours, s)))
    return out


def susp_ratios(n: int = 20, strategy: int = 1) -> tuple[float, float]:
    """Cost ratios VGT-/RC2SQL- and VGT/RC2SQL for the suspicious-brands query on Data Golf."""
    q = SUSP_QUERIES["Qsusp"]
    s = golf(q, n, strategy)
    c = {t: pair_cost(compile_query(q, mode=mode, agg=agg), s) for t, (mode, agg) in TOOLS.items()}
    return c["VGT-"] / c["RC2SQL-"], c["VGT"] / c["RC2SQL"]


# ---------------------------------------------------------------- cells


@dataclass
class Cell:
    experiment: str
    query: str
    n: int
    strategy: int
    tool: str
    engine: str
    status: str = "ok"  # ok, TO (timeout), RE (runtime error), - (not applicable)
    translate_s: float = 0.0
    cost: int | None = None
    rows: str = ""  # a row count or "INFINITE"
    wall_s: float | None = None
    note: str = ""


def _evaluate(c: Compiled, s: Structure, engine: str, db_url: str | None,
              int_columns: bool) -> tuple[str, int | None, float]:
    """Answer size, cost (in-memory engine only) and evaluation wall time."""
    if engine == "mem":
        start = time.perf_counter()
        ans = run_compiled(c, s)
        wall = time.perf_counter() - start
        rows = "INFINITE" if ans.infinite else str(len(ans.rows))
        return rows, cost(c.fin, s) + cost(c.inf, s), wall
    from .db import SqliteDatabase, UrlDatabase

    db = SqliteDatabase() if engine == "sqlite" else UrlDatabase(db_url, int_columns)
    try:
        # loading is not timed: relations are recreated before every cell
        db.load(s)
        fin_sql, inf_sql = c.sql(db.dialect, int_columns, order=False)
        start = time.perf_counter()
        rows = "INFINITE" if db.query(inf_sql) else str(len(db.query(fin_sql)))
        return rows, None, time.perf_counter() - start
    finally:
        db.close()


def _cell_worker(conn, c: Compiled, s: Structure, engine: str, db_url, int_columns):
    try:
        rows, cst, wall = _evaluate(c, s, engine, db_url, int_columns)
        conn.send(("ok", rows, cst, wall, ""))
    except Exception as exc:  # reported as RE in the table
        conn.send(("RE", "", None, None, f"{type(exc).__name__}: {exc}"))
    finally:
        conn.close()


def _run_limited(c: Compiled, s: Structure, engine: str, timeout: float, db_url, int_columns):
    ctx = mp.get_context("fork")
    recv, send = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_cell_worker, args=(send, c, s, engine, db_url, int_columns))
    proc.start()
    send.close()
    got = recv.recv() if recv.poll(timeout) else None
    if got is None:
        proc.terminate()
    proc.join()
    return got or ("TO", "", None, None, f"no answer within {timeout:g} s")


def run_bench(experiments=("small",), scale: float = 0.01, tools=tuple(TOOLS), engines=("mem",),
              timeout: float = 300.0, db_url: str | None = None, int_columns: bool = False,
              progress=None) -> list[Cell]:
    """Run every cell of the chosen experiments; ``n`` is scaled by ``scale`` (at least 2)."""
    cells: list[Cell] = []
    for exp in experiments:
        queries, base_n, strategies = EXPERIMENTS[exp]
        n = max(2, round(base_n * scale))
        for qname, q in queries.items():
            compiled: dict[str, Compiled | Exception] = {}
            for tool in tools:
                mode, agg = TOOLS[tool]
                try:
                    compiled[tool] = compile_query(q, mode=mode, agg=agg)
                except NotEvaluable as exc:
                    compiled[tool] = exc
            for strategy in strategies:
                s = golf(q, n, strategy)
                for tool in tools:
                    for engine in engines:
                        cell = Cell(exp, qname, n, strategy, tool, engine)
                        c = compiled[tool]
                        if isinstance(c, Exception):
                            cell.status, cell.note = "-", str(c)
                        else:
                            cell.translate_s = c.seconds
                            status, rows, cst, wall, note = _run_limited(c, s, engine, timeout, db_url, int_columns)
                            cell.status, cell.rows, cell.wall_s, cell.note = status, rows, wall, note
                            cell.cost = cst
                        cells.append(cell)
                        if progress:
                            progress(cell)
    _check_agreement(cells)
    return cells


def _check_agreement(cells: list[Cell]) -> None:
    """Mark cells whose engines disagree on the answer of the same tool."""
    by_key: dict[tuple, list[Cell]] = {}
    for c in cells:
        if c.status == "ok":
            by_key.setdefault((c.experiment, c.query, c.n, c.strategy, c.tool), []).append(c)
    for group in by_key.values():
        if len({c.rows for c in group}) > 1:
            for c in group:
                c.status = "RE"
                c.note = "engines disagree: " + ", ".join(f"{g.engine}={g.rows}" for g in group)


# ---------------------------------------------------------------- reports


def _fmt_cell(c: Cell, metric: str) -> str:
    if c.status != "ok":
        return c.status
    if metric == "wall":
        return f"{c.wall_s:.2f}"
    if metric == "cost":
        return "" if c.cost is None else str(c.cost)
    return c.rows


def markdown_report(cells: list[Cell], metric: str = "wall") -> str:
    """One table per experiment: tools by rows, queries by columns, translation time on top."""
    out = []
    for exp in dict.fromkeys(c.experiment for c in cells):
        group = [c for c in cells if c.experiment == exp]
        cols = list(dict.fromkeys((c.query, c.strategy) for c in group))
        multi = len({s for _, s in cols}) > 1
        names = [f"{q} (s={s})" if multi else q for q, s in cols]
        n = group[0].n
        out.append(f"### {exp} (n={n}, {metric})\n")
        out.append("| Query | " + " | ".join(names) + " |")
        out.append("|---" * (len(cols) + 1) + "|")
        trans = []
        for q, s in cols:
            t = next((c.translate_s for c in group if c.query == q and c.tool == "RC2SQL" and c.status != "-"), None)
            trans.append("" if t is None else f"{t:.2f}")
        out.append("| Translation time | " + " | ".join(trans) + " |")
        for tool, engine in dict.fromkeys((c.tool, c.engine) for c in group):
            if metric == "cost" and engine != "mem":
                continue
            row = []
            for q, s in cols:
                hit = [c for c in group if (c.query, c.strategy, c.tool, c.engine) == (q, s, tool, engine)]
                row.append(_fmt_cell(hit[0], metric) if hit else "")
            out.append(f"| {tool}^{engine} | " + " | ".join(row) + " |")
        out.append("")
    return "\n".join(out)


def tsv_report(cells: list[Cell]) -> str:
    """Every cell as one tab-separated line with a header."""
    buf = io.StringIO()
    names = [f.name for f in fields(Cell)]
    w = csv.DictWriter(buf, names, delimiter="\t", lineterminator="\n")
    w.writeheader()
    for c in cells:
        row = asdict(c)
        row["translate_s"] = f"{c.translate_s:.4f}"
        row["wall_s"] = "" if c.wall_s is None else f"{c.wall_s:.4f}"
        row["cost"] = "" if c.cost is None else c.cost
        w.writerow(row)
    return buf.getvalue()
