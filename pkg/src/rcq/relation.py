"""Finite named relations and the handful of algebra operations on them."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from .syntax import Atom, atom_key


class BudgetExceeded(RuntimeError):
    """Raised when an evaluation would enumerate more tuples than allowed."""


@dataclass(frozen=True)
class Relation:
    """A set of tuples with named, pairwise distinct columns."""

    columns: tuple[str, ...]
    rows: frozenset[tuple[Atom, ...]]

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise ValueError(f"duplicate columns {self.columns}")
        k = len(self.columns)
        for r in self.rows:
            if len(r) != k:
                raise ValueError(f"row {r} does not match columns {self.columns}")

    @classmethod
    def make(cls, columns: Iterable[str], rows: Iterable[tuple]) -> "Relation":
        return cls(tuple(columns), frozenset(tuple(r) for r in rows))

    @classmethod
    def empty(cls, columns: Iterable[str] = ()) -> "Relation":
        return cls(tuple(columns), frozenset())

    @classmethod
    def unit(cls) -> "Relation":
        """The nullary relation holding the empty tuple (logical truth)."""
        return cls((), frozenset({()}))

    def __len__(self) -> int:
        return len(self.rows)

    def __bool__(self) -> bool:
        return bool(self.rows)

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=lambda r: tuple(atom_key(a) for a in r))

    def reorder(self, columns: Iterable[str]) -> "Relation":
        columns = tuple(columns)
        if columns == self.columns:
            return self
        if set(columns) != set(self.columns):
            raise ValueError(f"cannot reorder {self.columns} as {columns}")
        idx = [self.columns.index(c) for c in columns]
        return Relation(columns, frozenset(tuple(r[i] for i in idx) for r in self.rows))

    def canonical(self) -> "Relation":
        """Same relation with columns in sorted order."""
        return self.reorder(sorted(self.columns))

    def project(self, columns: Iterable[str]) -> "Relation":
        columns = tuple(columns)
        idx = [self.columns.index(c) for c in columns]
        return Relation(columns, frozenset(tuple(r[i] for i in idx) for r in self.rows))

    def drop(self, column: str) -> "Relation":
        return self.project(c for c in self.columns if c != column)

    def select_eq(self, a: str, b: str) -> "Relation":
        i, j = self.columns.index(a), self.columns.index(b)
        return Relation(self.columns, frozenset(r for r in self.rows if r[i] == r[j]))

    def select_neq(self, a: str, b: str) -> "Relation":
        i, j = self.columns.index(a), self.columns.index(b)
        return Relation(self.columns, frozenset(r for r in self.rows if r[i] != r[j]))

    def select_const(self, a: str, value: Atom) -> "Relation":
        i = self.columns.index(a)
        return Relation(self.columns, frozenset(r for r in self.rows if r[i] == value))

    def duplicate(self, src: str, dst: str) -> "Relation":
        """Add column ``dst`` as a copy of ``src``."""
        i = self.columns.index(src)
        return Relation(self.columns + (dst,), frozenset(r + (r[i],) for r in self.rows))

    def union(self, other: "Relation") -> "Relation":
        other = other.reorder(self.columns)
        return Relation(self.columns, self.rows | other.rows)

    def difference(self, other: "Relation") -> "Relation":
        other = other.reorder(self.columns)
        return Relation(self.columns, self.rows - other.rows)

    def join(self, other: "Relation") -> "Relation":
        """Natural join on shared column names."""
        shared = [c for c in self.columns if c in other.columns]
        extra = [c for c in other.columns if c not in self.columns]
        li = [self.columns.index(c) for c in shared]
        ri = [other.columns.index(c) for c in shared]
        ei = [other.columns.index(c) for c in extra]
        index: dict[tuple, list[tuple]] = defaultdict(list)
        for r in other.rows:
            index[tuple(r[i] for i in ri)].append(tuple(r[i] for i in ei))
        out = set()
        for r in self.rows:
            for tail in index.get(tuple(r[i] for i in li), ()):
                out.add(r + tail)
        return Relation(self.columns + tuple(extra), frozenset(out))

    def antijoin(self, other: "Relation") -> "Relation":
        """Rows of ``self`` with no partner in ``other`` (columns of ``other`` must be shared)."""
        if not set(other.columns) <= set(self.columns):
            raise ValueError("anti-join needs the right columns to be a subset of the left ones")
        li = [self.columns.index(c) for c in other.columns]
        keys = other.rows
        return Relation(self.columns, frozenset(r for r in self.rows if tuple(r[i] for i in li) not in keys))

    def count(self, group: Iterable[str], result: str) -> "Relation":
        """Group by ``group`` and attach the group size as column ``result``."""
        group = tuple(group)
        gi = [self.columns.index(c) for c in group]
        counts: dict[tuple, int] = defaultdict(int)
        for r in self.rows:
            counts[tuple(r[i] for i in gi)] += 1
        if not group and not counts:
            counts[()] = 0
        return Relation(group + (result,), frozenset(k + (v,) for k, v in counts.items()))
