"""The full query compiler: query in, RANF pair, relational algebra and SQL out."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .aggregate import Counter
from .datagolf import training_structure
from .ra import RATranslation, ranf2ra
from .relation import Relation
from .semantics import Structure, cost, eval_ranf
from .sql import ra2sql
from .syntax import Query
from .translate import Translator

__all__ = ["Compiled", "compile_query", "run_compiled", "pair_cost", "Answer"]


@dataclass
class Compiled:
    """Both components of a translated query at every stage."""

    query: Query
    fin: Query
    inf: Query
    fin_ra: RATranslation
    inf_ra: RATranslation
    mode: str
    agg: bool
    seconds: float = 0.0
    stages: dict = field(default_factory=dict)

    def sql(self, dialect: str = "postgresql", int_columns: bool = False, order: bool = True) -> tuple[str, str]:
        return (ra2sql(self.fin_ra, dialect, int_columns, order),
                ra2sql(self.inf_ra, dialect, int_columns, order))


def compile_query(q: Query, training: Structure | None = None, mode: str = "rc2sql", agg: bool = True,
                  cp_extra: bool = True) -> Compiled:
    """Translate ``q`` into a RANF pair ``(fin, inf)`` and lower both to relational algebra.

    ``training`` defaults to the small Data Golf structure for ``q``.  With
    ``agg`` the count-aggregation rewrites run after normalization.
    """
    start = time.perf_counter()
    if training is None:
        training = training_structure(q)
    tr = Translator(training, mode=mode, cp_extra=cp_extra)
    split = tr.split(q)
    ranf = tr.rw(q)
    fin, inf = ranf.fin, ranf.inf
    if agg:
        counter = Counter(training, extended=True)
        fin, inf = counter.cnt(fin), counter.cnt(inf)
    out = Compiled(q, fin, inf, ranf2ra(fin), ranf2ra(inf), mode, agg)
    out.stages = {"split": split, "ranf": ranf}
    out.seconds = time.perf_counter() - start
    return out


def pair_cost(c: Compiled, s: Structure) -> int:
    """Cost of evaluating both components on ``s``."""
    return cost(c.fin, s) + cost(c.inf, s)


@dataclass(frozen=True)
class Answer:
    """``rows`` is None when the query has infinitely many answers."""

    rows: Relation | None

    @property
    def infinite(self) -> bool:
        return self.rows is None


def run_compiled(c: Compiled, s: Structure) -> Answer:
    """Evaluate in memory: the infinite check first, then the finite component."""
    if eval_ranf(c.inf, s):
        return Answer(None)
    return Answer(eval_ranf(c.fin, s))
