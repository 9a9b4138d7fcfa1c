"""r-balls, neighbourhood types, histograms and the frequency sampler."""

from __future__ import annotations

import itertools
from functools import lru_cache
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .canon import canonical_bytes
from .relational import Database, OracleHandle, Schema

__all__ = [
    "Ball",
    "BallTooLarge",
    "TypeRegistry",
    "ball",
    "ball_via_oracle",
    "ball_size_bound",
    "rooted_isomorphic",
    "canonical_code",
    "histogram",
    "distribution",
    "estimate_frequencies",
    "sampler_query_bound",
    "align",
    "l1",
]


class BallTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Ball:
    """An r-neighbourhood ``(D[N_r(a)], a)`` relabelled to ``1..size``.

    ``members[k - 1]`` is the original element that became ``k``.
    """

    schema: Schema
    size: int
    center: int
    radius: int
    relations: tuple[tuple[tuple[int, ...], ...], ...]
    members: tuple[int, ...] = ()
    degree_bound: int = 0
    _db: list = field(default_factory=list, repr=False, compare=False)

    @property
    def db(self) -> Database:
        if not self._db:
            self._db.append(Database.from_structure(self.schema, self.size, self.relations, self.degree_bound))
        return self._db[0]


@lru_cache(maxsize=None)
def ball_size_bound(d: int, r: int, max_arity: int = 2) -> int:
    """Upper bound on ``|N_r(a)|`` for databases of degree at most ``d``.

    For binary schemas and ``d >= 2`` this is ``d**(r + 1)``.  Wider
    relations give each element up to ``d * (arity - 1)`` Gaifman neighbours,
    so the geometric sum over that branching is used when it is larger.
    """
    g = d * max(max_arity - 1, 1)
    return max(d ** (r + 1), sum(g ** i for i in range(r + 1)))


def _relabel(schema, center, members, found):
    """``(size, relations, centre label, sorted members)`` of the induced
    sub-structure on ``members``."""
    members = sorted(members)
    relabel = {x: k for k, x in enumerate(members, start=1)}
    get = relabel.__getitem__
    rels = []
    for name in schema.names:
        ts = []
        for t in found[name]:
            try:
                ts.append(tuple(map(get, t)))
            except KeyError:  # tuple leaves the ball
                pass
        ts.sort()
        rels.append(tuple(ts))
    return len(members), tuple(rels), relabel[center], members


def _make_ball(schema, center, r, members, found, d):
    size, rels, root, members = _relabel(schema, center, members, found)
    return Ball(schema, size, root, r, rels, tuple(members), d)


def ball(db: Database, a: int, r: int) -> Ball:
    """The r-ball around ``a`` using direct access to ``db``."""
    if not 1 <= a <= db.n:
        raise IndexError(f"element {a} not in [1, {db.n}]")
    if r < 0:
        raise ValueError("radius must be non-negative")
    dist = {a: 0}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if dist[x] == r:
            continue
        for y in db.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    found = {}
    for name in db.schema.names:
        indptr, rows = db.incidence(name)
        arr = db.relation(name)
        idx = set()
        for x in dist:
            idx.update(rows[indptr[x]:indptr[x + 1]].tolist())
        found[name] = [tuple(arr[k].tolist()) for k in idx]
    return _make_ball(db.schema, a, r, dist, found, db.d)


def _explore(o: OracleHandle, a: int, r: int):
    names = o.schema.names
    dist = {a: 0}
    order = [a]
    found = {name: set() for name in names}
    pos = 0
    while pos < len(order):
        x = order[pos]
        pos += 1
        expand = dist[x] < r
        for name in names:
            ts = o.query_all(name, x)
            found[name].update(ts)
            if expand:
                for t in ts:
                    for y in t:
                        if y not in dist:
                            dist[y] = dist[x] + 1
                            order.append(y)
    return dist, found


def ball_via_oracle(o: OracleHandle, a: int, r: int) -> Ball:
    """The r-ball around ``a`` explored with oracle queries only.

    Every ball element is queried for all of its tuples (``j = 1, 2, ...``
    until the oracle answers ``None`` or ``j = d``), so at most
    ``|ball| * d * |sigma|`` queries are made.
    """
    dist, found = _explore(o, a, r)
    return _make_ball(o.schema, a, r, dist, found, o.d)


def rooted_isomorphic(b1: Ball, b2: Ball) -> bool:
    """Brute-force search for a relation-preserving bijection mapping
    centre to centre."""
    if b1.schema != b2.schema or b1.size != b2.size:
        return False
    if any(len(x) != len(y) for x, y in zip(b1.relations, b2.relations)):
        return False
    m = b1.size

    def degrees(b):
        deg = [Counter() for _ in range(m + 1)]
        for ri, ts in enumerate(b.relations):
            for t in ts:
                for p, y in enumerate(t):
                    deg[y][(ri, p)] += 1
        return deg

    deg1, deg2 = degrees(b1), degrees(b2)
    if deg1[b1.center] != deg2[b2.center]:
        return False
    sets2 = [set(ts) for ts in b2.relations]
    others1 = [x for x in range(1, m + 1) if x != b1.center]
    others2 = [x for x in range(1, m + 1) if x != b2.center]
    for perm in itertools.permutations(others2):
        phi = {b1.center: b2.center}
        ok = True
        for x, y in zip(others1, perm):
            if deg1[x] != deg2[y]:
                ok = False
                break
            phi[x] = y
        if not ok:
            continue
        if all(
            tuple(phi[y] for y in t) in sets2[ri]
            for ri, ts in enumerate(b1.relations)
            for t in ts
        ):
            return True
    return False


def canonical_code(b: Ball, cap: int | None = None) -> bytes:
    """Canonical byte code of the rooted isomorphism class of ``b``."""
    if cap is None:
        cap = ball_size_bound(max(b.degree_bound, 1), b.radius, b.schema.max_arity)
    if b.size > cap:
        raise BallTooLarge(f"ball has {b.size} elements, cap is {cap}")
    return canonical_bytes(b.schema.names, b.size, b.relations, b.center)


class TypeRegistry:
    """Ordered, append-only list of distinct type codes."""

    def __init__(self, codes: Iterable[bytes] = ()):
        self._codes: list[bytes] = []
        self._index: dict[bytes, int] = {}
        for code in codes:
            if code in self._index:
                raise ValueError("duplicate code in registry")
            self.register(code)

    def register(self, code: bytes) -> int:
        idx = self._index.get(code)
        if idx is None:
            idx = self._index[code] = len(self._codes)
            self._codes.append(code)
        return idx

    def lookup(self, code: bytes) -> int | None:
        return self._index.get(code)

    @property
    def codes(self) -> tuple[bytes, ...]:
        return tuple(self._codes)

    def __len__(self):
        return len(self._codes)

    def __iter__(self):
        return iter(self._codes)

    def __contains__(self, code):
        return code in self._index

    def copy(self) -> "TypeRegistry":
        return TypeRegistry(self._codes)

    def to_text(self) -> str:
        return "".join(code.hex() + "\n" for code in self._codes)

    @classmethod
    def from_text(cls, text: str) -> "TypeRegistry":
        return cls(bytes.fromhex(line.strip()) for line in text.splitlines() if line.strip())

    def __repr__(self):
        return f"TypeRegistry({len(self)} types)"


def histogram(db: Database, r: int, registry: TypeRegistry | None = None) -> tuple[int, ...]:
    """Counts of elements per r-type, indexed by ``registry`` positions.

    Types not yet in ``registry`` are appended to it, so the returned vector
    has one entry per registry code (zeros included).
    """
    if registry is None:
        registry = TypeRegistry()
    counts = Counter()
    for a in range(1, db.n + 1):
        counts[registry.register(canonical_code(ball(db, a, r)))] += 1
    return tuple(counts[i] for i in range(len(registry)))


def distribution(h: Sequence[int]) -> tuple[Fraction, ...]:
    n = sum(h)
    if n == 0:
        raise ValueError("distribution of an empty database is undefined")
    return tuple(Fraction(x, n) for x in h)


def sampler_query_bound(d: int, r: int, schema: Schema, s: int = 1) -> int:
    """Maximum number of oracle queries made by ``s`` ball explorations."""
    return s * ball_size_bound(d, r, schema.max_arity) * d * len(schema)


def estimate_frequencies(
    o: OracleHandle,
    n: int,
    r: int,
    s: int,
    seed,
    registry: TypeRegistry | None = None,
) -> tuple[tuple[Fraction, ...], TypeRegistry]:
    """Sample ``s`` elements uniformly and independently, classify their
    r-balls through the oracle, and return the sample type frequencies
    together with the registry they are indexed by."""
    if s < 1:
        raise ValueError("sample size must be positive")
    if registry is None:
        registry = TypeRegistry()
    rng = np.random.default_rng(seed)
    picks = rng.integers(1, n + 1, size=s).tolist()
    schema = o.schema
    cap = ball_size_bound(max(o.d, 1), r, schema.max_arity)
    counts = Counter()
    for a in picks:
        # same as canonical_code(ball_via_oracle(o, a, r)) without the Ball object
        dist, found = _explore(o, a, r)
        size, rels, root, _ = _relabel(schema, a, dist, found)
        if size > cap:
            raise BallTooLarge(f"ball has {size} elements, cap is {cap}")
        counts[registry.register(canonical_bytes(schema.names, size, rels, root))] += 1
    return tuple(Fraction(counts[i], s) for i in range(len(registry))), registry


def align(v1, reg1: TypeRegistry, v2, reg2: TypeRegistry):
    """Re-index two vectors over the union of their registries.

    Returns ``(w1, w2, merged)``; ``merged`` lists ``reg1``'s codes first.
    """
    merged = reg1.copy()
    for code in reg2:
        merged.register(code)
    w1 = [0] * len(merged)
    w2 = [0] * len(merged)
    for code, x in zip(reg1, v1):
        w1[merged.lookup(code)] = x
    for code, x in zip(reg2, v2):
        w2[merged.lookup(code)] = x
    return tuple(w1), tuple(w2), merged


def l1(u, v):
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum(abs(a - b) for a, b in zip(u, v))
