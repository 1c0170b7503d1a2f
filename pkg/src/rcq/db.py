"""Loading structures into a database and running generated SQL.

SQLite (standard library) is always available.  Other systems are reached
through SQLAlchemy, imported only when a URL is given.  Tables are dropped
and recreated on every load so that no state survives between runs.
"""

from __future__ import annotations

import sqlite3
from typing import Iterable

from .ra import AUX_TABLE, AUX_VALUE
from .semantics import Structure
from .sql import quote
from .syntax import Atom

__all__ = ["DatabaseError", "SqliteDatabase", "UrlDatabase", "open_database", "dialect_of_url"]


class DatabaseError(RuntimeError):
    """Connection or execution failure, as opposed to a problem with the query."""


def _normalize(value) -> Atom:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, str)):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if hasattr(value, "__int__"):
        return int(value)
    return str(value)


def _schema(s: Structure, arities: dict[str, int]) -> dict[str, int]:
    out = dict(arities)
    for name, rows in s.interps.items():
        for r in rows:
            out.setdefault(name, len(r))
            break
        out.setdefault(name, 0)
    return out


class SqliteDatabase:
    """In-memory (or file) SQLite database with dynamically typed columns."""

    dialect = "sqlite"

    def __init__(self, path: str = ":memory:"):
        try:
            self.conn = sqlite3.connect(path)
        except sqlite3.Error as exc:
            raise DatabaseError(str(exc)) from exc

    def load(self, s: Structure, arities: dict[str, int] | None = None) -> None:
        cur = self.conn.cursor()
        tables = _schema(s, arities or {})
        tables[AUX_TABLE] = 1
        try:
            for name, k in tables.items():
                q = quote(name, "sqlite")
                cur.execute(f"DROP TABLE IF EXISTS {q}")
                cols = ", ".join(quote(f"x{i + 1}", "sqlite") for i in range(k)) or quote("x1", "sqlite")
                cur.execute(f"CREATE TABLE {q} ({cols})")
                rows = [(AUX_VALUE,)] if name == AUX_TABLE else list(s.interps.get(name, ()))
                if rows and k:
                    marks = ", ".join("?" for _ in range(k))
                    cur.executemany(f"INSERT INTO {q} VALUES ({marks})", rows)
            self.conn.commit()
        except sqlite3.Error as exc:
            raise DatabaseError(str(exc)) from exc

    def query(self, sql: str) -> set[tuple]:
        try:
            rows = self.conn.execute(sql).fetchall()
        except sqlite3.Error as exc:
            raise DatabaseError(f"{exc}\n{sql}") from exc
        return {tuple(_normalize(v) for v in r) for r in rows}

    def close(self) -> None:
        self.conn.close()


def dialect_of_url(url: str) -> str:
    scheme = url.split(":", 1)[0].split("+", 1)[0]
    if scheme.startswith("postgres"):
        return "postgresql"
    if scheme in ("mysql", "mariadb"):
        return "mysql"
    if scheme == "sqlite":
        return "sqlite"
    raise DatabaseError(f"unsupported database URL scheme {scheme!r}")


class UrlDatabase:
    """Any database reachable through a SQLAlchemy URL.

    Columns are ``TEXT`` unless ``int_columns`` is set, in which case they
    are ``BIGINT`` and every stored atom must be an integer.
    """

    def __init__(self, url: str, int_columns: bool = False):
        try:
            import sqlalchemy
        except ImportError as exc:  # pragma: no cover - depends on the environment
            raise DatabaseError("SQLAlchemy is required for database URLs") from exc
        self._sa = sqlalchemy
        self.dialect = dialect_of_url(url)
        self.int_columns = int_columns
        try:
            self.engine = sqlalchemy.create_engine(url)
            self.conn = self.engine.connect()
        except Exception as exc:
            raise DatabaseError(f"cannot connect: {exc}") from exc

    def _ctype(self) -> str:
        if self.dialect == "sqlite":
            return ""
        if self.int_columns:
            return " BIGINT"
        return " VARCHAR(255)" if self.dialect == "mysql" else " TEXT"

    def _store(self, a: Atom):
        if self.dialect == "sqlite" or self.int_columns:
            return a
        return str(a)

    def load(self, s: Structure, arities: dict[str, int] | None = None) -> None:
        sa = self._sa
        tables = _schema(s, arities or {})
        tables[AUX_TABLE] = 1
        try:
            for name, k in tables.items():
                q = quote(name, self.dialect)
                self.conn.execute(sa.text(f"DROP TABLE IF EXISTS {q}"))
                cols = ", ".join(quote(f"x{i + 1}", self.dialect) + self._ctype() for i in range(max(k, 1)))
                self.conn.execute(sa.text(f"CREATE TABLE {q} ({cols})"))
                if name == AUX_TABLE:
                    rows: Iterable[tuple] = [(0 if self.int_columns else AUX_VALUE,)]
                else:
                    rows = s.interps.get(name, ())
                params = [{f"v{i}": self._store(a) for i, a in enumerate(r)} for r in rows]
                if params and k:
                    marks = ", ".join(f":v{i}" for i in range(k))
                    self.conn.execute(sa.text(f"INSERT INTO {q} VALUES ({marks})"), params)
            self.conn.commit()
        except Exception as exc:
            raise DatabaseError(str(exc)) from exc

    def query(self, sql: str) -> set[tuple]:
        try:
            rows = self.conn.execute(self._sa.text(sql)).fetchall()
        except Exception as exc:
            raise DatabaseError(f"{exc}\n{sql}") from exc
        return {tuple(_normalize(v) for v in r) for r in rows}

    def close(self) -> None:
        self.conn.close()
        self.engine.dispose()


def open_database(url: str | None, int_columns: bool = False):
    """SQLite in memory when ``url`` is empty, otherwise a SQLAlchemy-backed database."""
    if not url:
        return SqliteDatabase()
    return UrlDatabase(url, int_columns)
