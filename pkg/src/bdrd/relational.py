"""Bounded-degree relational databases over a fixed schema.

Domains are always ``[n] = {1, ..., n}``.  Relations are stored as read-only
``(m, arity)`` integer arrays sorted lexicographically, which keeps large
fixtures (millions of tuples) cheap; small databases can be viewed as plain
Python tuples through :meth:`Database.tuples`.
"""

from __future__ import annotations

from functools import cached_property
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

__all__ = [
    "Schema",
    "GRAPH",
    "Database",
    "OracleHandle",
    "OracleContractError",
    "DatabaseFormatError",
    "degree_of",
    "oracle_query",
    "gaifman_graph",
    "induced_subdb",
    "graph_db",
    "parse_db",
    "serialize_db",
    "read_db",
    "write_db",
]


class OracleContractError(ValueError):
    """A malformed oracle query (unknown relation, or i/j out of range)."""


class DatabaseFormatError(ValueError):
    """Invalid database text; carries the offending line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class Schema:
    """Ordered relation names with arities."""

    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        rels = tuple((str(name), int(ar)) for name, ar in self.relations)
        names = [name for name, _ in rels]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation names in schema: {names}")
        for name, ar in rels:
            if ar < 1:
                raise ValueError(f"relation {name!r} has arity {ar} < 1")
            if not name or any(ch.isspace() for ch in name) or ":" in name:
                raise ValueError(f"invalid relation name {name!r}")
        object.__setattr__(self, "relations", rels)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def arity(self, name: str) -> int:
        for rel, ar in self.relations:
            if rel == name:
                return ar
        raise KeyError(name)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @cached_property
    def max_arity(self) -> int:
        return max((ar for _, ar in self.relations), default=0)

    def __len__(self):
        return len(self.relations)


GRAPH = Schema((("E", 2),))


def _as_array(tuples, arity: int) -> np.ndarray:
    if isinstance(tuples, np.ndarray):
        arr = np.asarray(tuples, dtype=np.int64)
    else:
        arr = np.array(list(tuples), dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, arity), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != arity:
        raise ValueError(f"expected tuples of arity {arity}, got shape {arr.shape}")
    return arr


def _sort_unique(arr: np.ndarray) -> np.ndarray:
    if len(arr) == 0:
        return arr
    order = np.lexsort(arr.T[::-1])
    arr = arr[order]
    keep = np.ones(len(arr), dtype=bool)
    keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
    return arr[keep]


class Database:
    """An immutable sigma-db on the domain ``[n]`` with degree at most ``d``.

    ``relations`` maps every schema relation to an iterable of tuples (or an
    integer array).  Tuples are sorted and deduplicated on construction.
    When ``degree_bound`` is omitted the actual maximum degree is used.
    """

    def __init__(
        self,
        schema: Schema,
        n: int,
        relations: Mapping[str, Iterable[Sequence[int]] | np.ndarray] | None = None,
        degree_bound: int | None = None,
    ):
        if n < 0:
            raise ValueError("domain size must be non-negative")
        relations = dict(relations or {})
        unknown = set(relations) - set(schema.names)
        if unknown:
            raise ValueError(f"relations not in schema: {sorted(unknown)}")
        self.schema = schema
        self.n = int(n)
        rels = {}
        for name, ar in schema.relations:
            arr = _sort_unique(_as_array(relations.get(name, ()), ar))
            if len(arr) and (arr.min() < 1 or arr.max() > n):
                raise ValueError(f"relation {name}: element outside [1, {n}]")
            arr.setflags(write=False)
            rels[name] = arr
        self._rels = rels
        self._incidence = {}
        self._degrees = None
        actual = int(self.degrees().max()) if n else 0
        if degree_bound is None:
            degree_bound = actual
        if actual > degree_bound:
            raise ValueError(f"degree {actual} exceeds degree bound {degree_bound}")
        self.d = int(degree_bound)

    # -- views ---------------------------------------------------------------

    def relation(self, name: str) -> np.ndarray:
        return self._rels[name]

    def tuples(self, name: str) -> list[tuple[int, ...]]:
        return [tuple(row) for row in self._rels[name].tolist()]

    def all_tuples(self) -> set[tuple[str, tuple[int, ...]]]:
        return {(name, t) for name in self.schema.names for t in self.tuples(name)}

    @property
    def num_tuples(self) -> int:
        return sum(len(arr) for arr in self._rels.values())

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Database):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.n == other.n
            and self.d == other.d
            and all(np.array_equal(self._rels[k], other._rels[k]) for k in self._rels)
        )

    def __hash__(self):
        return hash((self.schema, self.n, self.d, tuple(arr.tobytes() for arr in self._rels.values())))

    def __repr__(self):
        return f"Database(n={self.n}, d={self.d}, tuples={self.num_tuples}, schema={list(self.schema.relations)})"

    def with_degree_bound(self, d: int) -> "Database":
        return Database(self.schema, self.n, self._rels, d)

    # -- incidence -----------------------------------------------------------

    def incidence(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """CSR index ``(indptr, rows)``: the tuples of ``name`` containing
        element ``a`` are ``rows[indptr[a]:indptr[a + 1]]``, in lexicographic
        order."""
        cached = self._incidence.get(name)
        if cached is not None:
            return cached
        arr = self._rels[name]
        m, ar = arr.shape
        elems = arr.T.reshape(-1)
        rows = np.tile(np.arange(m, dtype=np.int64), ar)
        if ar > 1 and m:
            pairs = np.unique(np.stack([elems, rows], axis=1), axis=0)
            elems, rows = pairs[:, 0], pairs[:, 1]
        else:
            order = np.lexsort((rows, elems))
            elems, rows = elems[order], rows[order]
        counts = np.bincount(elems, minlength=self.n + 1)
        indptr = np.zeros(self.n + 2, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        for a in (indptr, rows):
            a.setflags(write=False)
        self._incidence[name] = (indptr, rows)
        return indptr, rows

    def degrees(self) -> np.ndarray:
        """Array of length ``n + 1``; entry ``a`` is deg(a), entry 0 unused."""
        if self._degrees is None:
            deg = np.zeros(self.n + 1, dtype=np.int64)
            for name in self.schema.names:
                indptr, _ = self.incidence(name)
                deg += np.diff(indptr)[: self.n + 1]
            deg.setflags(write=False)
            self._degrees = deg
        return self._degrees

    def neighbors(self, a: int) -> set[int]:
        """Gaifman neighbours of ``a``."""
        out = set()
        for name in self.schema.names:
            indptr, rows = self.incidence(name)
            arr = self._rels[name]
            for k in rows[indptr[a]:indptr[a + 1]]:
                out.update(arr[k].tolist())
        out.discard(a)
        return out

    def structure(self) -> tuple[int, tuple[tuple[tuple[int, ...], ...], ...]]:
        """Plain-tuple form ``(n, per-relation sorted tuples)``."""
        return self.n, tuple(tuple(self.tuples(name)) for name in self.schema.names)

    @classmethod
    def from_structure(cls, schema, n, rels, degree_bound=None) -> "Database":
        return cls(schema, n, dict(zip(schema.names, rels)), degree_bound)


def degree_of(db: Database, a: int) -> int:
    if not 1 <= a <= db.n:
        raise IndexError(f"element {a} not in [1, {db.n}]")
    return int(db.degrees()[a])


class OracleHandle:
    """Read-only oracle access to a database, counting queries."""

    def __init__(self, db: Database):
        self._db = db
        self.n = db.n
        self.d = db.d
        self.schema = db.schema
        self.count = 0
        self._index = {}
        for name in db.schema.names:
            indptr, rows = db.incidence(name)
            self._index[name] = (indptr, rows, db.relation(name), {})

    def query(self, relation: str, i: int, j: int) -> tuple[int, ...] | None:
        """The ``j``-th tuple (1-based, lexicographic) of ``relation``
        containing element ``i``, or ``None``."""
        try:
            indptr, rows, arr, cache = self._index[relation]
        except KeyError:
            raise OracleContractError(f"unknown relation {relation!r}") from None
        if not 1 <= i <= self.n:
            raise OracleContractError(f"element index {i} not in [1, {self.n}]")
        if not 1 <= j <= self.d:
            raise OracleContractError(f"tuple index {j} not in [1, {self.d}]")
        self.count += 1
        found = cache.get(i)
        if found is None:
            # answers for element i, materialized once
            found = cache[i] = [tuple(t) for t in arr[rows[indptr[i]:indptr[i + 1]]].tolist()]
        return found[j - 1] if j <= len(found) else None

    def query_all(self, relation: str, i: int) -> list[tuple[int, ...]]:
        """All tuples of ``relation`` containing ``i``, in order.

        Equivalent to querying ``j = 1, 2, ...`` until ``None`` or ``j = d``,
        and charged exactly that many queries.
        """
        try:
            indptr, rows, arr, cache = self._index[relation]
        except KeyError:
            raise OracleContractError(f"unknown relation {relation!r}") from None
        if not 1 <= i <= self.n:
            raise OracleContractError(f"element index {i} not in [1, {self.n}]")
        found = cache.get(i)
        if found is None:
            found = cache[i] = [tuple(t) for t in arr[rows[indptr[i]:indptr[i + 1]]].tolist()]
        self.count += min(len(found) + 1, self.d)
        return list(found)

    def reset(self):
        self.count = 0


def oracle_query(o: OracleHandle, relation: str, i: int, j: int):
    return o.query(relation, i, j)


def gaifman_graph(db: Database) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(1, db.n + 1))
    for name in db.schema.names:
        for t in db.relation(name).tolist():
            elems = sorted(set(t))
            for x in range(len(elems)):
                for y in range(x + 1, len(elems)):
                    g.add_edge(elems[x], elems[y])
    return g


def induced_subdb(db: Database, members: Iterable[int]) -> tuple[Database, list[int]]:
    """Sub-database induced by ``members``, relabelled order-preservingly.

    Returns ``(sub, original)`` where ``original[k - 1]`` is the element of
    ``db`` that became ``k``.
    """
    original = sorted(set(int(a) for a in members))
    if original and (original[0] < 1 or original[-1] > db.n):
        raise IndexError("member outside the domain")
    relabel = np.zeros(db.n + 1, dtype=np.int64)
    relabel[original] = np.arange(1, len(original) + 1)
    rels = {}
    for name in db.schema.names:
        arr = db.relation(name)
        if len(arr):
            mapped = relabel[arr]
            rels[name] = mapped[np.all(mapped > 0, axis=1)]
    return Database(db.schema, len(original), rels, db.d), original


def graph_db(n: int, edges: Iterable[tuple[int, int]], d: int | None = None) -> Database:
    """Undirected graph as a symmetric, irreflexive ``{E}``-db."""
    tuples = []
    for u, v in edges:
        if u == v:
            raise ValueError("graphs are irreflexive")
        tuples.append((u, v))
        tuples.append((v, u))
    return Database(GRAPH, n, {"E": tuples}, d)


# -- text format -------------------------------------------------------------


def serialize_db(db: Database) -> str:
    lines = [
        "schema " + " ".join(f"{name}:{ar}" for name, ar in db.schema.relations),
        f"degree_bound {db.d}",
        f"domain {db.n}",
    ]
    for name in db.schema.names:
        lines.append(f"rel {name}")
        lines.extend(" ".join(map(str, t)) for t in db.relation(name).tolist())
    return "\n".join(lines) + "\n"


def _header(lines, idx, keyword):
    if idx >= len(lines):
        raise DatabaseFormatError(f"missing '{keyword}' header", idx + 1)
    parts = lines[idx].split()
    if not parts or parts[0] != keyword:
        raise DatabaseFormatError(f"expected '{keyword}'", idx + 1, 1)
    return parts[1:]


def _single(tokens, line):
    if len(tokens) != 1:
        raise DatabaseFormatError("expected exactly one value", line, 2)
    return _int(tokens[0], line, 2)


def _int(token, line, column):
    try:
        return int(token)
    except ValueError:
        raise DatabaseFormatError(f"not an integer: {token!r}", line, column) from None


def parse_db(text: str) -> Database:
    """Parse the canonical text format, validating every invariant."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    rels = []
    for col, tok in enumerate(_header(lines, 0, "schema"), start=2):
        name, sep, ar = tok.partition(":")
        if not sep:
            raise DatabaseFormatError(f"bad relation spec {tok!r}", 1, col)
        rels.append((name, _int(ar, 1, col)))
    try:
        schema = Schema(tuple(rels))
    except ValueError as exc:
        raise DatabaseFormatError(str(exc), 1) from None
    d = _single(_header(lines, 1, "degree_bound"), 2)
    n = _single(_header(lines, 2, "domain"), 3)
    if n < 0 or d < 0:
        raise DatabaseFormatError("negative domain or degree bound", 3)

    tuples = {name: [] for name in schema.names}
    deg = [0] * (n + 1)
    current = None
    prev = None
    seen = []
    for lineno, line in enumerate(lines[3:], start=4):
        parts = line.split()
        if not parts:
            raise DatabaseFormatError("blank line inside relation data", lineno)
        if parts[0] == "rel":
            if len(parts) != 2 or parts[1] not in tuples:
                raise DatabaseFormatError(f"unknown relation header {line!r}", lineno, 1)
            current = parts[1]
            if current in seen:
                raise DatabaseFormatError(f"relation {current} repeated", lineno, 1)
            expected = schema.names[len(seen)]
            if current != expected:
                raise DatabaseFormatError(f"relation {current} out of schema order (expected {expected})", lineno, 1)
            seen.append(current)
            prev = None
            continue
        if current is None:
            raise DatabaseFormatError("tuple before any 'rel' header", lineno, 1)
        ar = schema.arity(current)
        if len(parts) != ar:
            raise DatabaseFormatError(f"expected {ar} elements, got {len(parts)}", lineno, 1)
        t = tuple(_int(tok, lineno, col) for col, tok in enumerate(parts, start=1))
        for col, x in enumerate(t, start=1):
            if not 1 <= x <= n:
                raise DatabaseFormatError(f"element {x} outside [1, {n}]", lineno, col)
        if prev is not None and t <= prev:
            raise DatabaseFormatError("tuples not strictly increasing (unsorted or duplicate)", lineno, 1)
        prev = t
        for x in set(t):
            deg[x] += 1
            if deg[x] > d:
                raise DatabaseFormatError(f"element {x} exceeds degree bound {d}", lineno)
        tuples[current].append(t)
    if len(seen) != len(schema):
        missing = schema.names[len(seen)]
        raise DatabaseFormatError(f"missing 'rel {missing}' section", len(lines) + 1)
    return Database(schema, n, tuples, d)


def read_db(path) -> Database:
    with open(path) as fh:
        return parse_db(fh.read())


def write_db(db: Database, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_db(db))
