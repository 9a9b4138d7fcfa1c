"""Command-line interface: ``bdrd test|distance|histogram|params|experiment|generate``.

Database arguments are either a file in the text format or a generator
spec ``gen:FAMILY[:key=value,...]`` such as ``gen:grid:rows=3,cols=3``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import generators
from .distances import DistanceCapExceeded, dist_bdrd, dist_pm
from .harness import ExperimentConfig, exact_estimate, run_experiment
from .neighborhoods import TypeRegistry, histogram
from .relational import DatabaseFormatError, OracleHandle, read_db, serialize_db
from .semilinear import SemilinearFormatError
from .tester import PropertyFormatError, derive_params, epsilon_tester, load_property

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


def _params(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {item!r}")
        out[key] = int(value)
    return out


def load_source(source: str, seed: int = 0):
    if source.startswith("gen:"):
        _, family, *rest = source.split(":", 2)
        spec = generators.GeneratorSpec(family, _params(rest[0] if rest else ""), seed)
        return generators.generate(spec)
    return read_db(source)


def _emit(obj, fmt, out):
    if fmt == "json":
        json.dump(obj, out, sort_keys=True)
        out.write("\n")
        return
    rows = obj if isinstance(obj, list) else [obj]
    if not rows:
        return
    writer = csv.DictWriter(out, list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})


def cmd_test(args, out):
    db = load_source(args.db, args.seed)
    prop = load_property(args.property)
    eps = Fraction(args.eps)
    params = derive_params(eps, db.d, prop, args.mode)
    estimate = exact_estimate(db, params.r) if args.inject_exact else None
    o = OracleHandle(db)
    verdict = epsilon_tester(o, db.n, eps, prop, args.seed, params=params, estimate=estimate)
    result = verdict.as_dict()
    result.update(n=db.n, property=prop.name, eps=str(eps), mode=args.mode)
    _emit(result, args.format, out)
    return EXIT_ACCEPT if verdict.accept else EXIT_REJECT


def _payload(payload):
    if isinstance(payload, tuple):
        name, t = payload
        return [name, list(t)]
    return payload


def cmd_distance(args, out):
    a, b = load_source(args.left, args.seed), load_source(args.right, args.seed)
    result = dist_bdrd(a, b) if args.model == "bdrd" else dist_pm(a, b)
    obj = {"model": args.model, "value": "inf" if not result.finite else result.value}
    if args.witness:
        obj["witness"] = [[op.kind, op.side, _payload(op.payload)] for op in result.witness or []]
    _emit(obj, args.format, out)
    return 0


def cmd_histogram(args, out):
    db = load_source(args.db, args.seed)
    reg = TypeRegistry()
    if args.registry:
        with open(args.registry) as fh:
            reg = TypeRegistry.from_text(fh.read())
    h = histogram(db, args.radius, reg)
    if args.format == "json":
        _emit({"n": db.n, "radius": args.radius, "histogram": list(h),
               "types": [code.hex() for code in reg]}, "json", out)
    else:
        _emit([{"type": code.hex(), "count": x} for code, x in zip(reg, h)], "csv", out)
    return 0


def cmd_params(args, out):
    prop = load_property(args.property)
    params = derive_params(Fraction(args.eps), args.d, prop, args.mode)
    _emit(params.as_dict(), args.format, out)
    return 0


def cmd_experiment(args, out):
    config = ExperimentConfig(
        property=args.property,
        eps=Fraction(args.eps),
        family=args.family,
        sizes=tuple(int(x) for x in args.sizes.split(",")),
        trials=args.trials,
        seed=args.seed,
        mode=args.mode,
        inject_exact=args.inject_exact,
        record_timing=args.timing,
    )
    report = run_experiment(config)
    if args.format == "csv":
        out.write(report.to_csv())
    else:
        _emit({str(n): row for n, row in report.summary().items()}, "json", out)
    return 0


def cmd_generate(args, out):
    db = generators.generate(generators.GeneratorSpec(args.family, _params(args.params), args.seed))
    text = serialize_db(db)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default: csv for experiment, json otherwise)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--mode", choices=("paper", "calibrated"), default="paper")

    parser = argparse.ArgumentParser(prog="bdrd", description="Constant-query testing of bounded-degree databases.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", parents=[common], help="run the epsilon-tester on one database")
    p.add_argument("db")
    p.add_argument("--property", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--inject-exact", action="store_true", help="use the exact type distribution instead of sampling")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("distance", parents=[common], help="exact distance between two tiny databases")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--model", choices=("bdrd", "pm"), default="pm")
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("histogram", parents=[common], help="r-type histogram of a database")
    p.add_argument("db")
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--registry", help="registry file fixing the first coordinates")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("params", parents=[common], help="derived tester parameters")
    p.add_argument("--property", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--d", type=int, required=True, help="degree bound of the input class")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("experiment", parents=[common], help="repeated tester runs over a size sweep")
    p.add_argument("--property", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated element counts")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--inject-exact", action="store_true")
    p.add_argument("--timing", action="store_true", help="record wall-clock runtimes (breaks byte-identical output)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("generate", parents=[common], help="write a fixture database")
    p.add_argument("family", choices=sorted(generators.FAMILIES))
    p.add_argument("params", nargs="?", default="", help="comma-separated key=value size parameters")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    if args.format is None:
        args.format = "csv" if args.command == "experiment" else "json"
    try:
        return args.func(args, out)
    except (OSError, ValueError, KeyError, DatabaseFormatError, SemilinearFormatError,
            PropertyFormatError, DistanceCapExceeded, UsageError) as exc:
        print(f"bdrd: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
