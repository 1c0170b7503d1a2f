"""Reading and writing structures as facts files.

One fact per line, ``name(v1, ..., vk).``, where a value is an integer
literal or single-quoted text (``''`` escapes a quote).  Blank lines and
lines starting with ``#`` are ignored.  ``@arity name k`` declares a
relation that may have no facts.
"""

from __future__ import annotations

import re
from typing import TextIO

from .semantics import Structure
from .syntax import Atom, atom_key

__all__ = ["FactsError", "parse_facts", "read_facts", "write_facts", "format_facts", "arities_of"]

_FACT = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*\.\s*\Z")
_VALUE = re.compile(r"\s*(?:(-?\d+)|'((?:[^']|'')*)')\s*(,|\Z)")
_ARITY = re.compile(r"\s*@arity\s+([A-Za-z_][A-Za-z0-9_]*)\s+(\d+)\s*\Z")


class FactsError(ValueError):
    """Malformed facts file."""


def _values(text: str, lineno: int) -> tuple[Atom, ...]:
    if not text.strip():
        return ()
    out: list[Atom] = []
    pos = 0
    while pos < len(text):
        m = _VALUE.match(text, pos)
        if not m:
            raise FactsError(f"line {lineno}: bad value list {text!r}")
        out.append(int(m.group(1)) if m.group(1) is not None else m.group(2).replace("''", "'"))
        pos = m.end()
        if m.group(3) == "" and pos < len(text):
            raise FactsError(f"line {lineno}: trailing text in {text!r}")
    return tuple(out)


def parse_facts(text: str) -> tuple[Structure, dict[str, int]]:
    """Structure and relation arities described by ``text``."""
    tables: dict[str, set] = {}
    arities: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _ARITY.match(stripped)
        if m:
            name, k = m.group(1), int(m.group(2))
            if arities.setdefault(name, k) != k:
                raise FactsError(f"line {lineno}: {name} declared with arity {k} and {arities[name]}")
            tables.setdefault(name, set())
            continue
        m = _FACT.match(stripped)
        if not m:
            raise FactsError(f"line {lineno}: expected name(values). got {stripped!r}")
        name = m.group(1)
        row = _values(m.group(2), lineno)
        if arities.setdefault(name, len(row)) != len(row):
            raise FactsError(f"line {lineno}: {name} has arity {arities[name]}, found {len(row)} values")
        tables.setdefault(name, set()).add(row)
    return Structure({k: frozenset(v) for k, v in tables.items()}), arities


def read_facts(path: str) -> tuple[Structure, dict[str, int]]:
    with open(path, encoding="utf-8") as fh:
        return parse_facts(fh.read())


def _fmt(a: Atom) -> str:
    if isinstance(a, int):
        return str(a)
    return "'" + a.replace("'", "''") + "'"


def arities_of(s: Structure, extra: dict[str, int] | None = None) -> dict[str, int]:
    out = dict(extra or {})
    for name, rows in s.interps.items():
        for r in rows:
            out.setdefault(name, len(r))
            break
    return out


def format_facts(s: Structure, arities: dict[str, int] | None = None) -> str:
    """Facts text for ``s``; relations without tuples get an ``@arity`` line."""
    ar = arities_of(s, arities)
    lines = []
    for name in sorted(set(s.interps) | set(ar)):
        rows = s.interps.get(name, frozenset())
        if not rows:
            if name in ar:
                lines.append(f"@arity {name} {ar[name]}")
            continue
        for r in sorted(rows, key=lambda r: tuple(atom_key(a) for a in r)):
            lines.append(f"{name}(" + ", ".join(_fmt(a) for a in r) + ").")
    return "\n".join(lines) + ("\n" if lines else "")


def write_facts(s: Structure, out: TextIO | str, arities: dict[str, int] | None = None) -> None:
    text = format_facts(s, arities)
    if isinstance(out, str):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
