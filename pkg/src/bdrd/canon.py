"""Canonical forms of small relational structures.

A structure is ``(m, rels)`` with elements ``1..m`` and ``rels`` a tuple (one
entry per schema relation) of tuples of element tuples.  The canonical form is
the lexicographically smallest relabelled structure among labelings reached
by individualization-refinement; an optional root is pinned to label 1.
"""

from __future__ import annotations

from functools import lru_cache

Rels = tuple[tuple[tuple[int, ...], ...], ...]


def _incidence(m, rels):
    inc = [[] for _ in range(m + 1)]
    for ri, ts in enumerate(rels):
        for t in ts:
            for x in set(t):
                inc[x].append((ri, t))
    return inc


def _refine(cells, inc):
    while True:
        cell_of = {}
        for i, cell in enumerate(cells):
            for x in cell:
                cell_of[x] = i
        new = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                new.append(cell)
                continue
            groups = {}
            for x in cell:
                sig = tuple(sorted(
                    (ri, tuple(-1 if y == x else cell_of[y] for y in t)) for ri, t in inc[x]
                ))
                groups.setdefault(sig, []).append(x)
            if len(groups) == 1:
                new.append(cell)
            else:
                changed = True
                new.extend(groups[sig] for sig in sorted(groups))
        cells = new
        if not changed:
            return cells


def _swap_is_automorphism(x, y, inc, tuple_sets):
    def sw(z):
        return y if z == x else x if z == y else z

    for ri, t in inc[x] + inc[y]:
        if tuple(sw(z) for z in t) not in tuple_sets[ri]:
            return False
    return True


def _canonical(m: int, rels: Rels, root):
    inc = _incidence(m, rels)
    tuple_sets = [set(ts) for ts in rels]
    if m == 0:
        return tuple(() for _ in rels)
    if root is None:
        cells = [list(range(1, m + 1))]
    else:
        rest = [x for x in range(1, m + 1) if x != root]
        cells = [[root]] + ([rest] if rest else [])
    best = None

    def search(cells):
        nonlocal best
        target = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            label = {c[0]: i + 1 for i, c in enumerate(cells)}
            key = tuple(tuple(sorted(tuple(label[y] for y in t) for t in ts)) for ts in rels)
            if best is None or key < best:
                best = key
            return
        cell = cells[target]
        reps = []
        for x in cell:
            if any(_swap_is_automorphism(x, y, inc, tuple_sets) for y in reps):
                continue
            reps.append(x)
            rest = [c for c in cell if c != x]
            search(_refine(cells[:target] + [[x], rest] + cells[target + 1:], inc))

    search(_refine(cells, inc))
    return best


@lru_cache(maxsize=200_000)
def canonical_form(m: int, rels: Rels, root: int | None = None) -> Rels:
    """Canonically relabelled relations of ``(m, rels)``; equal outputs for
    equal ``m`` iff the structures are isomorphic (root to root)."""
    return _canonical(m, rels, root)


def encode(names, m: int, canon_rels: Rels) -> bytes:
    parts = [str(m)]
    for name, ts in zip(names, canon_rels):
        parts.append(f"{name}:" + ";".join(",".join(map(str, t)) for t in ts))
    return "|".join(parts).encode()


@lru_cache(maxsize=200_000)
def canonical_bytes(names, m: int, rels: Rels, root: int | None = None) -> bytes:
    return encode(names, m, canonical_form(m, rels, root))
