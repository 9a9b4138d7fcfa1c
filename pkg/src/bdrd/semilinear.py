"""Semilinear sets of histogram vectors.

All arithmetic is exact: vectors are tuples of Python ints, distances are
``Fraction`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

from .neighborhoods import TypeRegistry

__all__ = [
    "LinearSet",
    "SemilinearSet",
    "SemilinearFormatError",
    "contains",
    "find_witness",
    "enumerate_norm_range",
    "min_distribution_distance",
    "round_half_up",
    "round_to_target_size",
    "rounding_distance_bound",
    "alon_size_bound",
    "small_representative",
    "parse_semilinear",
    "serialize_semilinear",
    "read_semilinear",
]


class SemilinearFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _vec(values) -> tuple[int, ...]:
    out = tuple(int(x) for x in values)
    if any(x < 0 for x in out):
        raise ValueError(f"vector has negative entries: {out}")
    return out


@dataclass(frozen=True)
class LinearSet:
    """``{base + a_1 p_1 + ... + a_k p_k : a_j in N}``."""

    base: tuple[int, ...]
    periods: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        base = _vec(self.base)
        periods = tuple(_vec(p) for p in self.periods)
        for p in periods:
            if len(p) != len(base):
                raise ValueError("period dimension differs from base dimension")
            if sum(p) == 0:
                raise ValueError("periods must have non-zero l1 norm")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "periods", periods)

    @property
    def dim(self) -> int:
        return len(self.base)

    def point(self, coeffs: Sequence[int]) -> tuple[int, ...]:
        if len(coeffs) != len(self.periods):
            raise ValueError("wrong number of coefficients")
        out = list(self.base)
        for a, p in zip(coeffs, self.periods):
            for t, x in enumerate(p):
                out[t] += a * x
        return tuple(out)


@dataclass(frozen=True)
class SemilinearSet:
    """Finite union of linear sets over a shared coordinate space.

    ``registry`` optionally pins the meaning of each coordinate;
    ``registry_ref`` is the file name it was loaded from.
    """

    dim: int
    components: tuple[LinearSet, ...] = ()
    registry: TypeRegistry | None = field(default=None, compare=False)
    registry_ref: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("coordinate space must be non-empty")
        comps = tuple(self.components)
        for comp in comps:
            if comp.dim != self.dim:
                raise ValueError(f"component of dimension {comp.dim} in a {self.dim}-dimensional set")
        if self.registry is not None and len(self.registry) != self.dim:
            raise ValueError(f"registry has {len(self.registry)} types, set has dimension {self.dim}")
        object.__setattr__(self, "components", comps)

    @property
    def is_empty(self) -> bool:
        return not self.components

    @property
    def k(self) -> int:
        return max((len(c.periods) for c in self.components), default=0) + 1

    @property
    def v(self) -> int:
        return max(
            (sum(vec) for c in self.components for vec in (c.base, *c.periods)),
            default=0,
        )


def _solve(periods, rem):
    """Lexicographically smallest ``a`` with ``sum a_j p_j == rem``, or None."""
    k = len(periods)
    dim = len(rem)
    covered = [set() for _ in range(k + 1)]
    for j in range(k - 1, -1, -1):
        covered[j] = covered[j + 1] | {t for t in range(dim) if periods[j][t]}
    failed = set()

    def rec(j, rem):
        if not any(rem):
            return (0,) * (k - j)
        if j == k or (j, rem) in failed:
            return None
        if any(rem[t] and t not in covered[j] for t in range(dim)):
            failed.add((j, rem))
            return None
        p = periods[j]
        if j == k - 1:
            # the last coefficient is forced
            t0 = next(t for t in range(dim) if p[t])
            a, r = divmod(rem[t0], p[t0])
            return (a,) if r == 0 and all(rem[t] == a * p[t] for t in range(dim)) else None
        top = min(rem[t] // p[t] for t in range(dim) if p[t])
        for a in range(top + 1):
            sub = rec(j + 1, tuple(r - a * x for r, x in zip(rem, p)))
            if sub is not None:
                return (a,) + sub
        failed.add((j, rem))
        return None

    return rec(0, tuple(rem))


def find_witness(S: SemilinearSet, h: Sequence[int]):
    """``(component index, coefficients)`` certifying ``h in S``, or None."""
    h = tuple(h)
    if len(h) != S.dim:
        raise ValueError(f"vector of dimension {len(h)} for a {S.dim}-dimensional set")
    for i, comp in enumerate(S.components):
        rem = tuple(x - b for x, b in zip(h, comp.base))
        if any(x < 0 for x in rem):
            continue
        coeffs = _solve(comp.periods, rem)
        if coeffs is not None:
            return i, coeffs
    return None


def contains(S: SemilinearSet, h: Sequence[int]) -> bool:
    return find_witness(S, h) is not None


def _component_points(comp: LinearSet, hi: int) -> Iterator[tuple[int, ...]]:
    norms = [sum(p) for p in comp.periods]
    base_norm = sum(comp.base)
    if base_norm > hi:
        return
    k = len(norms)

    def rec(j, coeffs, norm):
        if j == k:
            yield coeffs, norm
            return
        a = 0
        while norm + a * norms[j] <= hi:
            yield from rec(j + 1, coeffs + (a,), norm + a * norms[j])
            a += 1

    for coeffs, norm in rec(0, (), base_norm):
        yield comp.point(coeffs), norm


def enumerate_norm_range(S: SemilinearSet, n_lo: int, n_hi: int) -> list[tuple[int, ...]]:
    """Every ``h in S`` with ``n_lo <= |h|_1 <= n_hi``, without duplicates,
    in (component, coefficient tuple) lexicographic discovery order."""
    if n_lo > n_hi:
        raise ValueError("empty norm range")
    seen = set()
    out = []
    for comp in S.components:
        for h, norm in _component_points(comp, n_hi):
            if norm >= n_lo and h not in seen:
                seen.add(h)
                out.append(h)
    return out


def min_distribution_distance(S: SemilinearSet, v: Sequence[Fraction], n_lo: int, n_hi: int):
    """``min |v - h/|h|_1|_1`` over ``h in S`` with norm in ``[n_lo, n_hi]``.

    Returns ``(distance, argmin)``; ``(math.inf, None)`` if no such ``h``.
    Zero vectors have no distribution and are skipped.
    """
    if len(v) != S.dim:
        raise ValueError("dimension mismatch")
    best, arg = math.inf, None
    for h in enumerate_norm_range(S, max(n_lo, 1), n_hi) if n_hi >= 1 else ():
        norm = sum(h)
        dist = sum(abs(Fraction(x) - Fraction(y, norm)) for x, y in zip(v, h))
        if dist < best:
            best, arg = dist, h
    return best, arg


def round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def round_to_target_size(S: SemilinearSet, i: int, coeffs: Sequence[int], n: int, n0) -> tuple[int, ...]:
    """Rescale a member of component ``i`` towards size ``n0``.

    Each coefficient ``a_j`` becomes the nearest integer to ``a_j * n0 / n``
    (ties round up).  Requires ``n = |h|_1 >= n0``.
    """
    comp = S.components[i]
    h = comp.point(coeffs)
    if sum(h) != n:
        raise ValueError(f"coefficients give a vector of norm {sum(h)}, not {n}")
    n0 = Fraction(n0)
    if n < n0 or n < 1:
        raise ValueError(f"need n >= n0 (n={n}, n0={n0})")
    return comp.point([round_half_up(Fraction(a) * n0 / n) for a in coeffs])


def rounding_distance_bound(S: SemilinearSet, n0) -> Fraction:
    """Guaranteed ``|dv - dv'|_1`` after :func:`round_to_target_size`:
    ``3 c (kv)^2 / (n0 - kv)``, which equals ``f - mu`` for the tester's ``n0``."""
    kv = S.k * S.v
    return Fraction(3 * S.dim * kv * kv) / (Fraction(n0) - kv)


def alon_size_bound(c: int, k: int, v: int, eps) -> Fraction:
    """``kv (3ckv/eps + 2)``."""
    kv = k * v
    return kv * (3 * c * kv / Fraction(eps) + 2)


def small_representative(S: SemilinearSet, h: Sequence[int], eps) -> tuple[int, ...]:
    """A member ``h0`` of ``S`` with ``|h0|_1 <= kv(3ckv/eps + 2)`` whose
    distribution is within ``eps`` of that of ``h``."""
    eps = Fraction(eps)
    h = tuple(h)
    witness = find_witness(S, h)
    if witness is None:
        raise ValueError("vector is not in the semilinear set")
    n = sum(h)
    if n <= alon_size_bound(S.dim, S.k, S.v, eps):
        return h
    kv = S.k * S.v
    n0 = kv * (3 * S.dim * kv / eps + 1)
    i, coeffs = witness
    return round_to_target_size(S, i, coeffs, n, n0)


# -- file format ---------------------------------------------------------------


def serialize_semilinear(S: SemilinearSet) -> str:
    lines = [f"dim {S.dim}"]
    if S.registry_ref is not None:
        lines.append(f"registry {S.registry_ref}")
    for comp in S.components:
        lines.append("base " + " ".join(map(str, comp.base)))
        lines.extend("period " + " ".join(map(str, p)) for p in comp.periods)
    return "\n".join(lines) + "\n"


def parse_semilinear(text: str, base_dir=None, registry: TypeRegistry | None = None) -> SemilinearSet:
    """Parse ``dim`` / ``registry`` / ``base`` / ``period`` lines.

    A ``registry`` line is resolved relative to ``base_dir`` unless a
    registry object is passed in explicitly.
    """
    dim = None
    ref = None
    comps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "dim":
            if dim is not None or len(rest) != 1:
                raise SemilinearFormatError("malformed or repeated 'dim'", lineno)
            dim = int(rest[0])
            if dim < 1:
                raise SemilinearFormatError("dimension must be positive", lineno)
        elif key == "registry":
            if len(rest) != 1:
                raise SemilinearFormatError("malformed 'registry'", lineno)
            ref = rest[0]
        elif key in ("base", "period"):
            if dim is None:
                raise SemilinearFormatError("vector before 'dim'", lineno)
            try:
                vec = _vec(rest)
            except ValueError as exc:
                raise SemilinearFormatError(str(exc), lineno) from None
            if len(vec) != dim:
                raise SemilinearFormatError(f"expected {dim} entries, got {len(vec)}", lineno)
            if key == "base":
                comps.append([vec, []])
            else:
                if not comps:
                    raise SemilinearFormatError("'period' before any 'base'", lineno)
                if sum(vec) == 0:
                    raise SemilinearFormatError("period with zero l1 norm", lineno)
                comps[-1][1].append(vec)
        else:
            raise SemilinearFormatError(f"unknown keyword {key!r}", lineno)
    if dim is None:
        raise SemilinearFormatError("missing 'dim'")
    if registry is None and ref is not None and base_dir is not None:
        registry = TypeRegistry.from_text((Path(base_dir) / ref).read_text())
    if registry is not None and len(registry) != dim:
        raise SemilinearFormatError(f"registry pins {len(registry)} coordinates, dim is {dim}")
    return SemilinearSet(dim, tuple(LinearSet(b, tuple(ps)) for b, ps in comps), registry, ref)


def read_semilinear(path) -> SemilinearSet:
    path = Path(path)
    return parse_semilinear(path.read_text(), base_dir=path.parent)
