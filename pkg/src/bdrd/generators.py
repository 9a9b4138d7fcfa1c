"""Fixture families of graph databases.

All generators return symmetric, irreflexive ``{E}``-databases and build the
edge arrays with numpy so that instances with millions of elements are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .relational import GRAPH, Database

__all__ = [
    "GeneratorSpec",
    "FAMILIES",
    "generate",
    "from_edges",
    "triangles",
    "matchings",
    "cycle",
    "path",
    "grid",
    "grid_minus_corner",
    "random_bounded_degree",
    "triangles_and_paths",
    "degree_two_graphs",
    "all_graphs",
]


def from_edges(n: int, edges, d: int | None = None) -> Database:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) and np.any(edges[:, 0] == edges[:, 1]):
        raise ValueError("graphs are irreflexive")
    both = np.concatenate([edges, edges[:, ::-1]]) if len(edges) else edges
    return Database(GRAPH, n, {"E": both}, d)


def _triangle_edges(t: int, offset: int = 0):
    a = offset + 3 * np.arange(t, dtype=np.int64) + 1
    return np.concatenate([np.stack([a, a + 1], 1), np.stack([a + 1, a + 2], 1), np.stack([a, a + 2], 1)])


def triangles(t: int, d: int = 4) -> Database:
    """``t`` vertex-disjoint triangles on ``3t`` elements."""
    return from_edges(3 * t, _triangle_edges(t), d)


def matchings(m: int, d: int = 2) -> Database:
    """A perfect matching with ``m`` edges."""
    a = 2 * np.arange(m, dtype=np.int64) + 1
    return from_edges(2 * m, np.stack([a, a + 1], 1), d)


def cycle(n: int, d: int = 4) -> Database:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    a = np.arange(1, n + 1, dtype=np.int64)
    return from_edges(n, np.stack([a, a % n + 1], 1), d)


def path(n: int, d: int = 4) -> Database:
    a = np.arange(1, n, dtype=np.int64)
    return from_edges(n, np.stack([a, a + 1], 1), d)


def _grid_edges(rows, cols, drop=None):
    label = {}
    for i in range(rows):
        for j in range(cols):
            if (i, j) != drop:
                label[(i, j)] = len(label) + 1
    edges = []
    for (i, j), a in label.items():
        for b in (label.get((i, j + 1)), label.get((i + 1, j))):
            if b:
                edges.append((a, b))
    return len(label), edges


def grid(rows: int, cols: int, d: int = 8) -> Database:
    """The ``rows x cols`` grid graph, vertices numbered row by row."""
    n, edges = _grid_edges(rows, cols)
    return from_edges(n, edges, d)


def grid_minus_corner(rows: int, cols: int, d: int = 8) -> Database:
    """The grid with its top-left corner vertex removed."""
    n, edges = _grid_edges(rows, cols, drop=(0, 0))
    return from_edges(n, edges, d)


def random_bounded_degree(n: int, max_degree: int, seed=0, rounds: int = 2) -> Database:
    """A random graph with every vertex degree at most ``max_degree``
    (tuple-degree bound ``2 * max_degree``)."""
    rng = np.random.default_rng(seed)
    deg = np.zeros(n + 1, dtype=np.int64)
    seen = set()
    edges = []
    for _ in range(rounds * max_degree):
        perm = rng.permutation(np.arange(1, n + 1))
        for u, v in zip(perm[0::2].tolist(), perm[1::2].tolist()):
            key = (min(u, v), max(u, v))
            if key in seen or deg[u] >= max_degree or deg[v] >= max_degree:
                continue
            seen.add(key)
            deg[u] += 1
            deg[v] += 1
            edges.append(key)
    return from_edges(n, sorted(edges), 2 * max_degree)


def triangles_and_paths(t: int, p: int, path_len: int = 4, d: int = 4) -> Database:
    """``t`` triangles followed by ``p`` disjoint paths on ``path_len``
    vertices each."""
    parts = [_triangle_edges(t)]
    start = 3 * t + path_len * np.arange(p, dtype=np.int64) + 1
    for k in range(path_len - 1):
        parts.append(np.stack([start + k, start + k + 1], 1))
    return from_edges(3 * t + path_len * p, np.concatenate(parts), d)


def _component_kinds(max_n):
    kinds = [("P", k) for k in range(1, max_n + 1)] + [("C", k) for k in range(3, max_n + 1)]
    return sorted(kinds, key=lambda kind: (kind[1], kind[0]))


def degree_two_graphs(max_n: int, d: int = 4):
    """Every graph of maximum degree 2 on at most ``max_n`` vertices, one per
    isomorphism class (disjoint unions of paths and cycles)."""
    kinds = _component_kinds(max_n)
    out = []

    def rec(start, n, parts):
        out.append(_assemble(parts, n, d))
        for idx in range(start, len(kinds)):
            size = kinds[idx][1]
            if n + size <= max_n:
                rec(idx, n + size, parts + [kinds[idx]])

    rec(0, 0, [])
    return out


def _assemble(parts, n, d):
    edges = []
    offset = 0
    for kind, size in parts:
        vs = list(range(offset + 1, offset + size + 1))
        edges += list(zip(vs, vs[1:]))
        if kind == "C":
            edges.append((vs[0], vs[-1]))
        offset += size
    return from_edges(n, edges, d)


def all_graphs(n: int, max_degree: int | None = None, d: int | None = None):
    """Every labelled graph on ``n`` vertices (optionally with vertex degree
    at most ``max_degree``)."""
    pairs = list(combinations(range(1, n + 1), 2))
    out = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        if max_degree is not None:
            deg = [0] * (n + 1)
            for u, v in edges:
                deg[u] += 1
                deg[v] += 1
            if max(deg) > max_degree:
                continue
        out.append(from_edges(n, edges, d))
    return out


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0


FAMILIES = {
    "disjoint-triangles": (triangles, ("t",)),
    "triangles": (triangles, ("t",)),
    "matchings": (matchings, ("m",)),
    "cycle": (cycle, ("n",)),
    "path": (path, ("n",)),
    "grid": (grid, ("rows", "cols")),
    "grid-minus-corner": (grid_minus_corner, ("rows", "cols")),
    "random-bounded-degree": (random_bounded_degree, ("n", "max_degree")),
    "triangles-and-paths": (triangles_and_paths, ("t", "p")),
}


def generate(spec: GeneratorSpec) -> Database:
    try:
        fn, required = FAMILIES[spec.family]
    except KeyError:
        raise ValueError(f"unknown family {spec.family!r}; known: {', '.join(FAMILIES)}") from None
    missing = [k for k in required if k not in spec.params]
    if missing:
        raise ValueError(f"family {spec.family!r} needs {', '.join(missing)}")
    kwargs = dict(spec.params)
    if spec.family == "random-bounded-degree":
        kwargs["seed"] = spec.seed
    return fn(**kwargs)
