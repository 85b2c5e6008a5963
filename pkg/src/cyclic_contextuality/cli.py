"""Command-line front end.

Exit codes: 0 noncontextual (or success), 10 contextual, 1 verification
failure, 2 invalid input or usage, 3 system too large for the LP oracle.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import criteria, ingest
from .lp_oracle import DEFAULT_LIMIT, ResourceLimitError, min_delta
from .model import SystemSpec, ValidationError, delta_of_coupling, format_rational

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_CONTEXTUAL = 10

TSIRELSON_STAND_IN = Fraction(7071, 10000)

PRESETS = {
    "pr-box": ((1, 1, 1, -1), ""),
    "chsh-classical": ((1, 1, 1, 1), ""),
    "chsh-tsirelson": (
        (TSIRELSON_STAND_IN,) * 3 + (-TSIRELSON_STAND_IN,),
        "products use 7071/10000 as a rational stand-in for 1/sqrt(2)",
    ),
    "leggett-garg-max": ((1, 1, -1), ""),
    "kcbs-max": ((-1,) * 5, ""),
}


def preset_spec(name: str) -> SystemSpec:
    """Zero-marginal system with the registered product expectations."""
    products, note = PRESETS[name]
    zeros = [0] * len(products)
    return SystemSpec.from_marginals(zeros, zeros, products, note=note)


class UsageError(Exception):
    pass


def _read_spec(args) -> SystemSpec:
    with open(args.path, encoding="utf-8") as fh:
        text = fh.read()
    if args.counts:
        return ingest.counts_to_spec(ingest.parse_counts(text), args.n)
    return ingest.parse_spec(text)


def _print_doc(doc: dict, fmt: str) -> None:
    if fmt == "json":
        print(ingest.dumps(doc))
        return
    for key in sorted(doc):
        if key == "decimal":
            continue
        value = doc[key]
        if isinstance(value, list):
            value = " ".join(str(v) for v in value) if value else "-"
        elif isinstance(value, dict):
            value = " ".join(f"{k}={v}" for k, v in sorted(value.items()))
        print(f"{key}: {value}")


def cmd_analyze(args) -> int:
    spec = _read_spec(args)
    report = criteria.cntx(spec)
    doc = ingest.emit_report(report)
    status = EXIT_CONTEXTUAL if report.contextual else EXIT_OK
    if args.oracle:
        result = min_delta(spec, limit=args.limit)
        doc["oracle_delta_min"] = format_rational(result.delta_min)
        doc["oracle_agrees"] = result.delta_min == report.delta_min
        if not doc["oracle_agrees"]:
            print("LP oracle disagrees with the closed form", file=sys.stderr)
            status = EXIT_FAILED
    _print_doc(doc, args.format)
    return status


def cmd_witness(args) -> int:
    spec = _read_spec(args)
    result = min_delta(spec, limit=args.limit)
    doc = ingest.emit_witness(result.witness)
    doc["delta"] = format_rational(delta_of_coupling(result.witness))
    doc["delta_min"] = format_rational(criteria.delta_min_formula(spec).value)
    doc["connections"] = [format_rational(c) for c in result.witness.connection_vector()]
    if args.format == "json":
        print(ingest.dumps(doc))
    else:
        print(f"delta: {doc['delta']}  delta_min: {doc['delta_min']}")
        print(f"connections: {' '.join(doc['connections'])}")
        print(" ".join(doc["variables"]))
        for atom in doc["atoms"]:
            print(f"{atom['outcome']}  {atom['probability']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_campaign

    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.n > args.limit:
        raise ResourceLimitError(f"n = {args.n} exceeds the oracle limit {args.limit}")
    summary, _ = run_campaign(
        args.n, args.trials, args.seed, limit=args.limit, jobs=args.jobs, generator=args.generator
    )
    doc = {
        "n": summary.n,
        "trials": summary.trials,
        "seed": summary.seed,
        "generator": args.generator,
        "passed": summary.passed,
        "failed": summary.failed,
        "contextual": summary.contextual,
        "case_coverage": {str(k): v for k, v in summary.case_coverage.items()},
    }
    if summary.first_counterexample is not None:
        doc["first_counterexample"] = summary.first_counterexample
    _print_doc(doc, args.format)
    return EXIT_OK if summary.ok else EXIT_FAILED


def cmd_preset(args) -> int:
    if args.name not in PRESETS:
        raise UsageError(f"unknown preset {args.name!r}; choose from {', '.join(sorted(PRESETS))}")
    print(ingest.serialize_spec(preset_spec(args.name)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclic-cntx", description="Contextuality analysis of cyclic systems of +/-1 measurements."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("path", help="spec document, or a counts table with --counts")
        p.add_argument("--counts", action="store_true", help="read a counts table instead of a spec")
        p.add_argument("--n", type=int, default=None, help="number of contexts in a counts table")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="largest n the LP may take")

    p = sub.add_parser("analyze", help="closed-form contextuality report")
    add_input(p)
    p.add_argument("--oracle", action="store_true", help="cross-check Delta_min with the LP")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("witness", help="optimal coupling from the LP")
    add_input(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="random formula-versus-LP campaign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument(
        "--generator", choices=("uniform", "extreme", "clustered", "contextual"), default="uniform"
    )
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("preset", help="print a built-in spec document")
    p.add_argument("name")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
