"""Exact distances between tiny databases.

Two measures are provided: the classical tuple-edit distance (``dist_bdrd``,
infinite between databases of different sizes) and the distance that also
allows inserting and deleting elements (``dist_pm``).  Both contain graph
isomorphism, so they are brute-force test oracles with hard size caps.

``dist_pm`` uses the fact that an optimal edit script never needs to insert
elements: an inserted element can always be traded for deleting its partner
on the other side.  An optimum therefore matches a subset of one domain to a
subset of the other; unmatched elements are deleted and the matched parts are
repaired tuple by tuple.  ``dist_pm_search`` computes the same quantity by
uniform-cost search over edit scripts and serves as an independent check.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .canon import canonical_form
from .relational import Database, gaifman_graph, induced_subdb

__all__ = [
    "EditOp",
    "DistanceResult",
    "DistanceCapExceeded",
    "dist_bdrd",
    "dist_pm",
    "dist_pm_search",
    "close_pm",
    "close_bdrd",
    "dist_to_property_pm",
    "partition_check",
    "replay",
    "isomorphic",
]

INF = math.inf

KINDS = ("insert-element", "delete-element", "insert-tuple", "delete-tuple")


class DistanceCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class EditOp:
    """One modification.  ``payload`` is the element label for
    ``delete-element``, ``(relation, tuple)`` for tuple edits and ``None``
    for ``insert-element`` (which appends a new isolated last element)."""

    kind: str
    side: str
    payload: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if self.side not in ("left", "right"):
            raise ValueError(f"unknown side {self.side!r}")


@dataclass
class DistanceResult:
    value: float | int
    witness: list[EditOp] | None = field(default=None)

    @property
    def finite(self) -> bool:
        return self.value != INF


# -- plain structures: (n, {relation: set of tuples}) ---------------------------


def _struct(db: Database):
    return db.n, {name: set(db.tuples(name)) for name in db.schema.names}


def _delete_element(n, rels, x):
    def lab(y):
        return y - 1 if y > x else y

    return n - 1, {
        name: {tuple(lab(y) for y in t) for t in ts if x not in t}
        for name, ts in rels.items()
    }


def _apply(n, rels, op: EditOp):
    if op.kind == "delete-element":
        if not 1 <= op.payload <= n:
            raise ValueError(f"cannot delete element {op.payload} of {n}")
        return _delete_element(n, rels, op.payload)
    if op.kind == "insert-element":
        return n + 1, {name: set(ts) for name, ts in rels.items()}
    name, t = op.payload
    rels = {k: set(v) for k, v in rels.items()}
    if op.kind == "insert-tuple":
        if t in rels[name] or not all(1 <= y <= n for y in t):
            raise ValueError(f"cannot insert {name}{t}")
        rels[name].add(t)
    else:
        if t not in rels[name]:
            raise ValueError(f"cannot delete missing tuple {name}{t}")
        rels[name].discard(t)
    return n, rels


def replay(db1: Database, db2: Database, ops: Iterable[EditOp]):
    """Apply a witness script; returns the two resulting plain structures."""
    sides = {"left": _struct(db1), "right": _struct(db2)}
    for op in ops:
        sides[op.side] = _apply(*sides[op.side], op)
    return sides["left"], sides["right"]


def _frozen(n, rels, names):
    return n, tuple(tuple(sorted(rels[name])) for name in names)


def isomorphic(a, b, names) -> bool:
    """Isomorphism of two plain structures via canonical forms."""
    (n1, r1), (n2, r2) = _frozen(*a, names), _frozen(*b, names)
    return n1 == n2 and canonical_form(n1, r1) == canonical_form(n2, r2)


# -- classical distance -------------------------------------------------------------


def dist_bdrd(D1: Database, D2: Database, max_size: int = 8) -> DistanceResult:
    """Minimum tuple insertions/deletions making ``D1`` and ``D2`` isomorphic,
    by exhaustive search over all domain bijections."""
    if D1.schema != D2.schema:
        raise ValueError("schemas differ")
    if D1.n != D2.n:
        return DistanceResult(INF)
    if D1.n > max_size:
        raise DistanceCapExceeded(f"{D1.n} elements exceeds the cap of {max_size}")
    names = D1.schema.names
    t1 = [(name, t) for name in names for t in D1.tuples(name)]
    t2 = {(name, t) for name in names for t in D2.tuples(name)}
    best, best_perm = INF, None
    for perm in itertools.permutations(range(1, D1.n + 1)):
        common = sum((name, tuple(perm[y - 1] for y in t)) in t2 for name, t in t1)
        cost = len(t1) + len(t2) - 2 * common
        if cost < best:
            best, best_perm = cost, perm
            if cost == 0:
                break
    inverse = {y: x for x, y in enumerate(best_perm, start=1)}
    mapped = {(name, tuple(best_perm[y - 1] for y in t)) for name, t in t1}
    witness = [EditOp("delete-tuple", "left", (name, t)) for name, t in t1
               if (name, tuple(best_perm[y - 1] for y in t)) not in t2]
    witness += [EditOp("insert-tuple", "left", (name, tuple(inverse[y] for y in t)))
                for name, t in sorted(t2) if (name, t) not in mapped]
    return DistanceResult(best, witness)


# -- distance with element modifications: branch and bound ------------------------------


def _order(db: Database):
    g = gaifman_graph(db)
    deg = db.degrees()
    order, seen = [], set()
    for start in sorted(range(1, db.n + 1), key=lambda a: (-deg[a], a)):
        if start in seen:
            continue
        seen.add(start)
        queue = [start]
        while queue:
            x = queue.pop(0)
            order.append(x)
            for y in sorted(g[x], key=lambda a: (-deg[a], a)):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return order


def dist_pm(
    D1: Database,
    D2: Database,
    upper: float | None = None,
    max_size: int = 32,
    node_budget: int = 5_000_000,
) -> DistanceResult:
    """Exact distance allowing element and tuple modifications on both sides.

    With ``upper`` given, only scripts of cost at most ``upper`` are sought;
    if none exists the result is infinite.  Raises
    :class:`DistanceCapExceeded` beyond ``max_size`` total elements or
    ``node_budget`` search nodes.
    """
    if D1.schema != D2.schema:
        raise ValueError("schemas differ")
    n1, n2 = D1.n, D2.n
    if n1 + n2 > max_size:
        raise DistanceCapExceeded(f"{n1 + n2} elements exceeds the cap of {max_size}")
    names = D1.schema.names
    T1 = {(name, t) for name in names for t in D1.tuples(name)}
    T2 = {(name, t) for name in names for t in D2.tuples(name)}
    inc1 = {x: [] for x in range(1, n1 + 1)}
    inc2 = {y: [] for y in range(1, n2 + 1)}
    for name, t in T1:
        for x in set(t):
            inc1[x].append((name, t))
    for name, t in T2:
        for y in set(t):
            inc2[y].append((name, t))
    deg2 = {y: len(inc2[y]) for y in inc2}
    order = _order(D1)
    comp_of, orbit = _orbits(D2)
    touched = [0] * (max(comp_of.values(), default=-1) + 1)

    # only solutions strictly cheaper than ``best`` are recorded
    best = n1 + n2 + 1 if upper is None else min(n1 + n2 + 1, math.floor(upper) + 1)
    best_map = None
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    nodes = 0

    def step_cost(x, y):
        cost = 0
        for name, t in inc1[x]:
            if all(z in fwd for z in t):
                if (name, tuple(fwd[z] for z in t)) not in T2:
                    cost += 1
        for name, t in inc2[y]:
            if all(z in bwd for z in t):
                if (name, tuple(bwd[z] for z in t)) not in T1:
                    cost += 1
        return cost

    def rec(i, cost):
        nonlocal best, best_map, nodes
        nodes += 1
        if nodes > node_budget:
            raise DistanceCapExceeded("search node budget exhausted")
        rem1 = n1 - i
        avail2 = n2 - len(bwd)
        if cost + abs(rem1 - avail2) >= best:
            return
        if i == n1:
            best, best_map = cost + avail2, dict(fwd)
            return
        x = order[i]
        dx = len(inc1[x])
        candidates = []
        tried = set()
        for y in range(1, n2 + 1):
            if y in bwd:
                continue
            if not touched[comp_of[y]]:
                # images outside untouched components are fixed by any
                # automorphism permuting those components, so one
                # representative per orbit suffices
                if orbit[y] in tried:
                    continue
                tried.add(orbit[y])
            candidates.append(y)
        candidates.sort(key=lambda y: (abs(deg2[y] - dx), y))
        for y in candidates:
            fwd[x] = y
            bwd[y] = x
            touched[comp_of[y]] += 1
            rec(i + 1, cost + step_cost(x, y))
            touched[comp_of[y]] -= 1
            del fwd[x]
            del bwd[y]
        rec(i + 1, cost + 1)

    rec(0, 0)
    if best_map is None:
        return DistanceResult(INF)
    return DistanceResult(best, _pm_witness(D1, D2, best_map, T1, T2))


def _orbits(db: Database):
    """Component index of each element and a key identifying its orbit
    under automorphisms that permute isomorphic components."""
    import networkx as nx

    comp_of, orbit = {}, {}
    for ci, comp in enumerate(nx.connected_components(gaifman_graph(db))):
        members = sorted(comp)
        sub, original = induced_subdb(db, members)
        m, rels = sub.structure()
        shape = canonical_form(m, rels)
        for k, y in enumerate(original, start=1):
            comp_of[y] = ci
            orbit[y] = (m, shape, canonical_form(m, rels, k))
    return comp_of, orbit


def _pm_witness(D1, D2, fwd, T1, T2):
    ops = []
    gone1 = sorted((x for x in range(1, D1.n + 1) if x not in fwd), reverse=True)
    gone2 = sorted((y for y in range(1, D2.n + 1) if y not in fwd.values()), reverse=True)
    ops += [EditOp("delete-element", "left", x) for x in gone1]
    ops += [EditOp("delete-element", "right", y) for y in gone2]
    keep1 = sorted(fwd)
    keep2 = sorted(fwd.values())
    lab1 = {x: k for k, x in enumerate(keep1, start=1)}
    lab2 = {y: k for k, y in enumerate(keep2, start=1)}
    pi = {lab1[x]: lab2[y] for x, y in fwd.items()}
    inv = {b: a for a, b in pi.items()}
    R1 = {(name, tuple(lab1[z] for z in t)) for name, t in T1 if all(z in lab1 for z in t)}
    R2 = {(name, tuple(lab2[z] for z in t)) for name, t in T2 if all(z in lab2 for z in t)}
    target = {(name, tuple(inv[z] for z in t)) for name, t in R2}
    ops += [EditOp("delete-tuple", "left", item) for item in sorted(R1 - target)]
    ops += [EditOp("insert-tuple", "left", item) for item in sorted(target - R1)]
    return ops


# -- the same distance by uniform-cost search over edit scripts ---------------------------


def _freeze(n, rels):
    return n, tuple(tuple(sorted(ts)) for ts in rels)


def _moves(n, rels, arities, d, max_elems):
    """All single modifications of a plain structure (list-of-sets form)."""
    deg = [0] * (n + 1)
    for ts in rels:
        for t in ts:
            for y in set(t):
                deg[y] += 1
    for x in range(1, n + 1):
        yield ("delete-element", x), _delete_element_list(n, rels, x)
    if n < max_elems:
        yield ("insert-element", None), (n + 1, [set(ts) for ts in rels])
    for ri, ts in enumerate(rels):
        for t in sorted(ts):
            new = [set(s) for s in rels]
            new[ri].discard(t)
            yield ("delete-tuple", (ri, t)), (n, new)
        for t in itertools.product(range(1, n + 1), repeat=arities[ri]):
            if t in ts or any(deg[y] >= d for y in set(t)):
                continue
            new = [set(s) for s in rels]
            new[ri].add(t)
            yield ("insert-tuple", (ri, t)), (n, new)


def _delete_element_list(n, rels, x):
    def lab(y):
        return y - 1 if y > x else y

    return n - 1, [{tuple(lab(y) for y in t) for t in ts if x not in t} for ts in rels]


def dist_pm_search(
    D1: Database,
    D2: Database,
    max_states: int = 500_000,
    d: int | None = None,
) -> DistanceResult:
    """``dist_pm`` by uniform-cost (A*) search over pairs of structures.

    States are memoized by canonical form.  Element insertions are allowed
    up to one element beyond the larger input; tuple insertions keep the
    degree at most ``d`` (default: the larger degree bound of the inputs).
    """
    if D1.schema != D2.schema:
        raise ValueError("schemas differ")
    names = D1.schema.names
    arities = [ar for _, ar in D1.schema.relations]
    d = max(D1.d, D2.d) if d is None else d
    max_elems = max(D1.n, D2.n) + 1
    start = ((D1.n, [set(D1.tuples(name)) for name in names]),
             (D2.n, [set(D2.tuples(name)) for name in names]))

    def key(state):
        (na, ra), (nb, rb) = state
        return canonical_form(*_freeze(na, ra)), na, canonical_form(*_freeze(nb, rb)), nb

    def h(state):
        return abs(state[0][0] - state[1][0])

    upper = D1.n + D2.n
    start_key = key(start)
    best_g = {start_key: 0}
    parent = {start_key: None}
    reps = {start_key: start}
    counter = itertools.count()
    heap = [(h(start), 0, next(counter), start_key)]
    while heap:
        f, g, _, k = heapq.heappop(heap)
        if g > best_g[k]:
            continue
        ca, na, cb, nb = k
        if na == nb and ca == cb:
            return DistanceResult(g, _unwind(parent, k, names))
        if len(best_g) > max_states:
            raise DistanceCapExceeded("state budget exhausted")
        state = reps[k]
        for side in (0, 1):
            n, rels = state[side]
            for move, child in _moves(n, rels, arities, d, max_elems):
                new_state = (child, state[1]) if side == 0 else (state[0], child)
                ng = g + 1
                if ng + h(new_state) > upper:
                    continue
                nk = key(new_state)
                if ng < best_g.get(nk, INF):
                    best_g[nk] = ng
                    parent[nk] = (k, side, move)
                    reps[nk] = new_state
                    heapq.heappush(heap, (ng + h(new_state), ng, next(counter), nk))
    raise AssertionError("deleting every element always reaches a goal")


def _unwind(parent, k, names):
    ops = []
    while parent[k] is not None:
        k, side, (kind, payload) = parent[k]
        if kind in ("insert-tuple", "delete-tuple"):
            ri, t = payload
            payload = (names[ri], t)
        ops.append(EditOp(kind, "left" if side == 0 else "right", payload))
    ops.reverse()
    return ops


# -- closeness ----------------------------------------------------------------------------


def _budget(D1, D2, eps, d):
    d = max(D1.d, D2.d) if d is None else d
    return eps * d * min(D1.n, D2.n)


def close_pm(D1: Database, D2: Database, eps, d: int | None = None) -> bool:
    """``dist_pm(D1, D2) <= eps * d * min(|D1|, |D2|)``."""
    budget = _budget(D1, D2, eps, d)
    if abs(D1.n - D2.n) > budget:
        return False
    return dist_pm(D1, D2, upper=budget).finite


def close_bdrd(D1: Database, D2: Database, eps, d: int | None = None) -> bool:
    if D1.n != D2.n:
        return False
    return dist_bdrd(D1, D2).value <= _budget(D1, D2, eps, d)


def dist_to_property_pm(D: Database, members: Sequence[Database], eps, d: int | None = None) -> bool:
    """Whether ``D`` is eps-close to some database in the explicit list."""
    return any(close_pm(D, M, eps, d) for M in members)


def partition_check(D: Database, D2: Database, eps, k: int) -> bool:
    """Whether ``D2`` is an (eps, k)-partition of ``D``."""
    if D.schema != D2.schema or D.n != D2.n:
        return False
    t1, t2 = D.all_tuples(), D2.all_tuples()
    if not t2 <= t1 or len(t1 - t2) > eps * D.n:
        return False
    g = gaifman_graph(D2)
    import networkx as nx

    return all(len(c) <= k for c in nx.connected_components(g))
