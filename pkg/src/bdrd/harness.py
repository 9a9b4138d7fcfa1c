"""Experiment driver: repeated tester runs over a sweep of input sizes."""

from __future__ import annotations

import csv
import io
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from . import generators
from .neighborhoods import TypeRegistry, distribution, histogram
from .relational import Database, OracleHandle
from .tester import PropertySpec, derive_params, epsilon_tester, load_property

__all__ = ["ExperimentConfig", "Report", "CSV_COLUMNS", "sized_instance", "exact_estimate", "run_experiment"]

CSV_COLUMNS = ("trial", "seed", "n", "branch", "verdict", "queries", "l1_min", "runtime_us")


def sized_instance(family: str, n: int, seed: int = 0) -> Database:
    """An instance of ``family`` with about ``n`` elements."""
    if family in ("disjoint-triangles", "triangles"):
        return generators.triangles(n // 3)
    if family == "matchings":
        return generators.matchings(n // 2)
    if family == "cycle":
        return generators.cycle(n)
    if family == "path":
        return generators.path(n)
    if family == "random-bounded-degree":
        return generators.random_bounded_degree(n, 2, seed)
    raise ValueError(f"family {family!r} has no size parameter")


def exact_estimate(db: Database, r: int):
    """The exact type distribution of ``db``, in the form accepted by the
    tester's ``estimate`` argument."""
    reg = TypeRegistry()
    return distribution(histogram(db, r, reg)), reg


@dataclass
class ExperimentConfig:
    property: str
    eps: Fraction
    family: str
    sizes: tuple[int, ...]
    trials: int
    seed: int = 0
    mode: str = "calibrated"
    inject_exact: bool = False
    record_timing: bool = False


@dataclass
class Report:
    config: ExperimentConfig
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        by_n = defaultdict(list)
        for row in self.rows:
            by_n[row["n"]].append(row)
        out = {}
        for n, rows in sorted(by_n.items()):
            out[n] = {
                "trials": len(rows),
                "accept_rate": sum(r["verdict"] == "accept" for r in rows) / len(rows),
                "max_queries": max(r["queries"] for r in rows),
                "mean_runtime_us": sum(r["runtime_us"] for r in rows) / len(rows),
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in sorted(self.rows, key=lambda r: r["trial"]):
            writer.writerow(row)
        return buf.getvalue()


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value)
    return "inf" if value == float("inf") else str(value)


def run_experiment(config: ExperimentConfig, prop: PropertySpec | None = None) -> Report:
    """Run ``trials`` tester invocations per size.

    Trial indices run across the whole sweep and trial ``i`` uses seed
    ``seed + i``.  ``runtime_us`` is 0 unless ``record_timing`` is set, so
    reports are byte-identical across runs by default.
    """
    if prop is None:
        prop = load_property(config.property)
    report = Report(config)
    trial = 0
    for n in config.sizes:
        db = sized_instance(config.family, n, config.seed)
        params = derive_params(config.eps, db.d, prop, config.mode)
        estimate = exact_estimate(db, params.r) if config.inject_exact else None
        o = OracleHandle(db)
        for _ in range(config.trials):
            seed = config.seed + trial
            o.reset()
            start = time.perf_counter_ns()
            verdict = epsilon_tester(o, db.n, config.eps, prop, seed, params=params, estimate=estimate)
            elapsed = (time.perf_counter_ns() - start) // 1000
            report.rows.append({
                "trial": trial,
                "seed": seed,
                "n": db.n,
                "branch": verdict.branch,
                "verdict": "accept" if verdict.accept else "reject",
                "queries": verdict.queries,
                "l1_min": _fmt(verdict.l1_min),
                "runtime_us": elapsed if config.record_timing else 0,
            })
            trial += 1
    return report
