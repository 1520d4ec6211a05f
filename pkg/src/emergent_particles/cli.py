"""Command line entry point: ``emergent-particles {run,validate,list-scenarios}``.

Exit status: 0 when every verdict passes, 1 on parse or validation failure,
2 when a runtime contract is violated or a verdict fails.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ContractViolation
from .scenarios import (CATALOG_DESCRIPTIONS, SCENARIOS, ConfigParseError, _merge,
                        default_config, emit, load_config, run_scenario, validate)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _load(path: str):
    try:
        return load_config(path), None
    except ConfigParseError as exc:
        return None, f"parse error: {exc}"
    except OSError as exc:
        return None, f"cannot read {path}: {exc.strerror}"


def cmd_validate(args) -> int:
    doc, err = _load(args.config)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INVALID
    violations = validate(doc)
    for v in violations:
        print(v)
    if violations:
        return EXIT_INVALID
    print(f"{args.config}: valid ({doc['scenario']})")
    return EXIT_OK


def cmd_run(args) -> int:
    doc, err = _load(args.config)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INVALID
    violations = validate(doc)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    try:
        result = run_scenario(doc)
    except ContractViolation as exc:
        print(f"contract violated [{exc.contract}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    cfg = _merge(default_config(doc["scenario"]), doc)
    out_dir = args.out or cfg["output"]["dir"]
    formats = tuple(args.format.split(","))
    try:
        paths = emit(result, out_dir, cfg["output"]["prefix"], formats)
    except OSError as exc:
        print(f"cannot write outputs to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    width = max(len(k) for k in result.summary)
    for name, c in result.summary.items():
        verdict = "pass" if c.passed else "FAIL"
        print(f"{name:<{width}}  {c.value:.6g} {c.relation} {c.limit:.6g}  {verdict}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK if result.passed else EXIT_RUNTIME


def cmd_list(args) -> int:
    for name in SCENARIOS:
        print(f"{name:<22} {CATALOG_DESCRIPTIONS[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emergent-particles",
                                     description="Identical-particle and decoherence scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="validate and run a scenario config")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--format", default="csv,json-summary",
                   help="comma-separated subset of csv,json-summary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-scenarios", help="print the scenario catalog")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        bad = set(args.format.split(",")) - {"csv", "json-summary"}
        if bad:
            print(f"unknown format(s): {', '.join(sorted(bad))}", file=sys.stderr)
            return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
