"""Parameter derivation and the constant-query epsilon-tester.

A tester run has two branches.  Inputs with at most ``n_max`` elements are
read completely through the oracle and handed to the property's exact
decider.  Larger inputs are sampled: the r-type frequencies of ``s`` random
elements are compared against normalized histograms of members whose size
lies in ``[n_min, n_max]``.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

import networkx as nx

from .distances import dist_to_property_pm
from .neighborhoods import (
    TypeRegistry,
    align,
    distribution,
    estimate_frequencies,
    histogram,
    l1,
)
from .relational import Database, OracleHandle, gaifman_graph
from .semilinear import LinearSet, SemilinearSet, min_distribution_distance, read_semilinear

__all__ = [
    "LocalityProfile",
    "TesterParams",
    "PropertySpec",
    "Verdict",
    "PropertyFormatError",
    "sample_size",
    "params_from_lambda",
    "derive_params",
    "materialize",
    "epsilon_tester",
    "trivial_tester_bip_or_odd",
    "locality_violations",
    "calibrate_lambda",
    "DECIDERS",
    "parse_property",
    "read_property",
    "load_property",
    "builtin_properties",
]


class PropertyFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class LocalityProfile:
    """Step functions ``eps -> r`` and ``eps -> lambda``.

    ``entries`` holds ``(min_eps, r, lam)`` triples; the entry with the
    largest ``min_eps <= eps`` applies.  In a paper profile ``lam`` is the
    locality theorem's constant, which the tester scales by
    ``eps / (1 + d**(r+1))``.  In a calibrated profile ``lam`` is used as is.
    """

    entries: tuple[tuple[Fraction, int, Fraction], ...]
    provenance: str = ""

    def __post_init__(self):
        entries = tuple(sorted((Fraction(e), int(r), Fraction(lam)) for e, r, lam in self.entries))
        for e, r, lam in entries:
            if not 0 < lam <= 1:
                raise ValueError(f"lambda must lie in (0, 1], got {lam}")
            if r < 0:
                raise ValueError("radius must be non-negative")
        radii = [r for _, r, _ in entries]
        if radii != sorted(radii, reverse=True):
            raise ValueError("radius must not grow with eps")
        object.__setattr__(self, "entries", entries)

    def _entry(self, eps):
        eps = Fraction(eps)
        chosen = None
        for entry in self.entries:
            if entry[0] <= eps:
                chosen = entry
        if chosen is None:
            raise ValueError(f"profile does not cover eps = {eps}")
        return chosen

    def base_radius(self, eps) -> int:
        return self._entry(eps)[1]

    def base_lambda(self, eps) -> Fraction:
        return self._entry(eps)[2]


@dataclass(frozen=True)
class TesterParams:
    eps: Fraction
    d: int
    r: int
    lam: Fraction
    c: int
    k: int
    v: int
    f: Fraction
    mu: Fraction
    n0: Fraction
    n_min: int
    n_max: int
    s: int
    mode: str = "paper"

    def as_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            out[key] = str(value) if isinstance(value, Fraction) else value
        return out


@dataclass
class PropertySpec:
    name: str
    decider: Callable[[Database], bool]
    histograms: Mapping[int, SemilinearSet]
    profile: LocalityProfile | None = None
    calibrated: LocalityProfile | None = None
    decider_name: str = ""
    provenance: str = ""
    _embedded: dict = field(default_factory=dict, repr=False)

    def semilinear(self, r: int) -> SemilinearSet:
        try:
            return self.histograms[r]
        except KeyError:
            raise ValueError(f"property {self.name!r} has no semilinear set at radius {r}") from None


@dataclass
class Verdict:
    accept: bool
    branch: str
    queries: int
    seed: object = None
    estimate: tuple | None = None
    registry: TypeRegistry | None = None
    l1_min: Fraction | float | None = None
    argmin: tuple | None = None

    def as_dict(self) -> dict:
        est = None if self.estimate is None else [str(x) for x in self.estimate]
        l1_min = self.l1_min
        if isinstance(l1_min, Fraction):
            l1_min = str(l1_min)
        elif l1_min == math.inf:
            l1_min = "inf"
        return {
            "verdict": "accept" if self.accept else "reject",
            "branch": self.branch,
            "queries": self.queries,
            "seed": self.seed,
            "estimate": est,
            "l1_min": l1_min,
            "argmin": None if self.argmin is None else list(self.argmin),
        }


# -- parameters ----------------------------------------------------------------


def sample_size(c: int, mu) -> int:
    """``ceil(c^2 / mu^2 * ln(20 c))``, evaluated to 60 significant digits."""
    mu = Fraction(mu)
    ratio = Fraction(c * c) / (mu * mu)
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        value = decimal.Decimal(ratio.numerator) / decimal.Decimal(ratio.denominator)
        value *= decimal.Decimal(20 * c).ln()
        return int(value.to_integral_value(rounding=decimal.ROUND_CEILING))


def params_from_lambda(eps, d: int, r: int, lam, S: SemilinearSet, mode: str = "paper") -> TesterParams:
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    c, k, v = S.dim, S.k, S.v
    f = lam / (3 * c)
    mu = lam / (6 * c)
    kv = k * v
    n0 = kv * (Fraction(3 * c * kv) / (f - mu) + 1)
    n_min = math.ceil(n0 - kv)
    n_max = math.floor(n0 + kv)
    if kv and n_min <= 0:
        raise ValueError("inconsistent profile: n_min <= 0")
    return TesterParams(Fraction(eps), d, r, lam, c, k, v, f, mu, n0, n_min, n_max, sample_size(c, mu), mode)


def derive_params(eps, d: int, prop: PropertySpec, mode: str = "paper") -> TesterParams:
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if mode == "paper":
        if prop.profile is None:
            raise ValueError(f"property {prop.name!r} has no locality profile")
        r = prop.profile.base_radius(eps / 4)
        lam = eps * prop.profile.base_lambda(eps / 4) / (1 + d ** (r + 1))
    elif mode == "calibrated":
        if prop.calibrated is None:
            raise ValueError(f"property {prop.name!r} has no calibrated profile")
        r = prop.calibrated.base_radius(eps)
        lam = prop.calibrated.base_lambda(eps)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return params_from_lambda(eps, d, r, lam, prop.semilinear(r), mode)


# -- the tester -------------------------------------------------------------------


def materialize(o: OracleHandle, n: int) -> Database:
    """Read the whole database through the oracle (at most ``n*d*|sigma|``
    queries)."""
    rels = {}
    for name in o.schema.names:
        found = set()
        for i in range(1, n + 1):
            for j in range(1, o.d + 1):
                t = o.query(name, i, j)
                if t is None:
                    break
                found.add(t)
        rels[name] = sorted(found)
    return Database(o.schema, n, rels, o.d)


def _embedded(prop: PropertySpec, r: int, merged: TypeRegistry) -> SemilinearSet:
    """The property's set at radius r, padded with zero coordinates for the
    extra types of ``merged`` (whose first codes are the property's)."""
    S = prop.semilinear(r)
    extra = len(merged) - S.dim
    if extra == 0:
        return S
    key = (r, merged.codes)
    if key not in prop._embedded:
        pad = (0,) * extra
        comps = tuple(LinearSet(c.base + pad, tuple(p + pad for p in c.periods)) for c in S.components)
        prop._embedded[key] = SemilinearSet(len(merged), comps)
    return prop._embedded[key]


def epsilon_tester(
    o: OracleHandle,
    n: int,
    eps,
    prop: PropertySpec,
    seed=0,
    mode: str = "paper",
    params: TesterParams | None = None,
    estimate: tuple | None = None,
) -> Verdict:
    """Accept members of ``prop``; reject inputs eps-far from it.

    ``estimate`` may be ``(vector, registry)`` to replace the sampling step
    with a known frequency vector (for derandomized checks).
    """
    if params is None:
        params = derive_params(eps, o.d, prop, mode)
    start = o.count
    if n <= params.n_max:
        db = materialize(o, n)
        return Verdict(bool(prop.decider(db)), "full-check", o.count - start, seed)
    if estimate is None:
        est, reg = estimate_frequencies(o, n, params.r, params.s, seed)
    else:
        est, reg = estimate
    S = prop.semilinear(params.r)
    if S.registry is None:
        raise ValueError(f"property {prop.name!r} has no registry at radius {params.r}")
    _, w, merged = align((0,) * S.dim, S.registry, est, reg)
    dist, arg = min_distribution_distance(_embedded(prop, params.r, merged), w, params.n_min, params.n_max)
    return Verdict(dist <= params.f, "sampled", o.count - start, seed, tuple(w), merged, dist, arg)


def is_bipartite_or_odd(db: Database) -> bool:
    return db.n % 2 == 1 or nx.is_bipartite(gaifman_graph(db))


def trivial_tester_bip_or_odd(o: OracleHandle, n: int, eps) -> Verdict:
    """Every graph with ``n >= 1/(eps d)`` vertices is eps-close to having
    odd order (insert one isolated vertex), so large inputs are accepted
    without queries; small ones are decided exactly."""
    eps = Fraction(eps)
    start = o.count
    if n * eps * o.d >= 1:
        return Verdict(True, "threshold", 0)
    db = materialize(o, n)
    return Verdict(is_bipartite_or_odd(db), "full-check", o.count - start)


# -- calibration ----------------------------------------------------------------


def locality_violations(eps, r: int, lam, fixtures: Sequence[Database], members: Sequence[Database], d=None):
    """Fixtures whose r-type distribution is within ``lam`` of some member's
    but which are eps-far from every listed member."""
    lam = Fraction(lam)
    registry = TypeRegistry()
    member_hist = [histogram(M, r, registry) for M in members if M.n]
    fixture_hist = [histogram(D, r, registry) for D in fixtures]
    c = len(registry)

    def dv(h):
        h = tuple(h) + (0,) * (c - len(h))
        return distribution(h)

    member_dv = [dv(h) for h in member_hist]
    bad = []
    for D, h in zip(fixtures, fixture_hist):
        if not D.n:
            continue
        v = dv(h)
        if any(l1(v, w) <= lam for w in member_dv):
            if not dist_to_property_pm(D, members, eps, d):
                bad.append(D)
    return bad


def calibrate_lambda(eps, r: int, candidates, fixtures, members, d=None):
    """Largest candidate lambda with no locality violation, or None."""
    for lam in sorted((Fraction(x) for x in candidates), reverse=True):
        if not locality_violations(eps, r, lam, fixtures, members, d):
            return lam
    return None


# -- built-in deciders ------------------------------------------------------------


def _symmetric_irreflexive(db: Database) -> bool:
    ts = db.all_tuples()
    return all(t[0] != t[1] and (t[0], (t[1][1], t[1][0])) in ts for t in ts)


def is_disjoint_triangles(db: Database) -> bool:
    if db.schema.names != ("E",) or not _symmetric_irreflexive(db):
        return False
    g = gaifman_graph(db)
    return all(len(c) == 3 and g.subgraph(c).number_of_edges() == 3 for c in nx.connected_components(g))


def is_matching(db: Database) -> bool:
    if db.schema.names != ("E",) or not _symmetric_irreflexive(db):
        return False
    g = gaifman_graph(db)
    return all(deg == 1 for _, deg in g.degree())


def is_grid(db: Database) -> bool:
    if db.schema.names != ("E",) or not _symmetric_irreflexive(db) or db.n == 0:
        return False
    g = gaifman_graph(db)
    for a in range(1, math.isqrt(db.n) + 1):
        if db.n % a == 0:
            grid = nx.grid_2d_graph(a, db.n // a)
            if nx.is_isomorphic(g, grid):
                return True
    return False


DECIDERS: dict[str, Callable[[Database], bool]] = {
    "disjoint-triangles": is_disjoint_triangles,
    "matchings": is_matching,
    "bip-or-odd": is_bipartite_or_odd,
    "grid": is_grid,
}


# -- property files -------------------------------------------------------------------


def _keyvals(tokens, lineno, required):
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise PropertyFormatError(f"expected key=value, got {tok!r}", lineno)
        out[key] = value
    missing = [k for k in required if k not in out]
    if missing:
        raise PropertyFormatError(f"missing {', '.join(missing)}", lineno)
    try:
        return (
            Fraction(out.get("min_eps", "0")),
            int(out["r"]),
            Fraction(out["lambda"]),
        )
    except (ValueError, ZeroDivisionError) as exc:
        raise PropertyFormatError(str(exc), lineno) from None


def parse_property(text: str, base_dir=".") -> PropertySpec:
    """Parse a property file.

    Keywords: ``name``, ``decider``, ``radius`` (opens a block for the
    following ``semilinear`` and ``registry`` lines), ``profile r= lambda=``
    with optional ``min_eps=``, ``calibrated min_eps= r= lambda=`` and
    ``provenance``.  File names are relative to ``base_dir``.
    """
    base_dir = Path(base_dir)
    name = decider = None
    provenance = []
    radius = None
    files: dict[int, dict] = {}
    profile, calibrated = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "name" and len(rest) == 1:
            name = rest[0]
        elif key == "decider" and len(rest) == 1:
            if rest[0] not in DECIDERS:
                raise PropertyFormatError(f"unknown decider {rest[0]!r}", lineno)
            decider = rest[0]
        elif key == "radius" and len(rest) == 1:
            try:
                radius = int(rest[0])
            except ValueError:
                raise PropertyFormatError("radius must be an integer", lineno) from None
            files.setdefault(radius, {})
        elif key in ("semilinear", "registry") and len(rest) == 1:
            if radius is None:
                raise PropertyFormatError(f"'{key}' before 'radius'", lineno)
            files[radius][key] = rest[0]
        elif key == "profile":
            profile.append(_keyvals(rest, lineno, ("r", "lambda")))
        elif key == "calibrated":
            calibrated.append(_keyvals(rest, lineno, ("min_eps", "r", "lambda")))
        elif key == "provenance":
            provenance.append(" ".join(rest))
        else:
            raise PropertyFormatError(f"malformed line starting with {key!r}", lineno)
    if name is None or decider is None:
        raise PropertyFormatError("property needs 'name' and 'decider'")
    histograms = {}
    for r, entry in files.items():
        if "semilinear" not in entry:
            raise PropertyFormatError(f"radius {r} has no semilinear file")
        S = read_semilinear(base_dir / entry["semilinear"])
        if "registry" in entry:
            reg = TypeRegistry.from_text((base_dir / entry["registry"]).read_text())
            if len(reg) != S.dim:
                raise PropertyFormatError(f"registry for radius {r} does not match the set's dimension")
            S = SemilinearSet(S.dim, S.components, reg, entry["registry"])
        histograms[r] = S
    note = " ".join(provenance)
    try:
        prof = LocalityProfile(tuple(profile), note) if profile else None
        cal = LocalityProfile(tuple(calibrated), note) if calibrated else None
    except ValueError as exc:
        raise PropertyFormatError(str(exc)) from None
    return PropertySpec(name, DECIDERS[decider], histograms, prof, cal, decider, note)


def read_property(path) -> PropertySpec:
    path = Path(path)
    return parse_property(path.read_text(), path.parent)


def _data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def builtin_properties() -> list[str]:
    return sorted(p.stem for p in _data_dir().glob("*.prop"))


def load_property(name_or_path) -> PropertySpec:
    """A property by built-in name (see :func:`builtin_properties`) or path."""
    path = Path(name_or_path)
    if path.suffix != ".prop" or not path.exists():
        candidate = _data_dir() / f"{name_or_path}.prop"
        if candidate.exists():
            path = candidate
    if not path.exists():
        raise FileNotFoundError(f"no property file or built-in named {name_or_path!r}")
    return read_property(path)
