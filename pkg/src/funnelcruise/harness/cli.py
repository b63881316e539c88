"""Command-line interface: ``funnelcruise simulate | validate | batch``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import FunnelCruiseError, ScenarioValidationError
from ..scenarios import ScenarioConfig, scenario_preset, validate_scenario
from .runner import emit_batch, run
from .scenario_io import load_scenario

log = logging.getLogger("funnelcruise")


def resolve_scenario(spec: str) -> ScenarioConfig:
    """``preset:N`` or a path to a scenario file."""
    if spec.startswith("preset:"):
        try:
            return scenario_preset(int(spec.split(":", 1)[1]))
        except (KeyError, ValueError):
            raise SystemExit(f"unknown preset {spec!r}; use preset:1, preset:2 or preset:3")
    return load_scenario(spec)


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    if args.saturate is not None:
        config = replace(config, controller=replace(config.controller,
                                                    saturation=tuple(args.saturate)))
    integ = config.integ
    if args.tol is not None:
        integ = replace(integ, rel_tol=args.tol)
    if args.output_dt is not None:
        integ = replace(integ, output_dt=args.output_dt)
    return replace(config, integ=integ)


def cmd_simulate(args) -> int:
    config = _apply_overrides(resolve_scenario(args.scenario), args)
    _, report = run(config, args.out)
    for key, value in report.as_dict().items():
        print(f"{key:24s} {value}")
    print(f"wrote {Path(args.out) / 'trace.csv'}")
    if not args.check:
        return 0
    return 0 if report.passed else 1


def cmd_validate(args) -> int:
    try:
        config = resolve_scenario(args.scenario)
    except ScenarioValidationError as exc:
        violations = exc.violations
    else:
        violations = validate_scenario(config)
    for v in violations:
        print(f"violation: {v}")
    if not violations:
        print(f"{args.scenario}: ok")
    return 1 if violations else 0


def cmd_batch(args) -> int:
    paths = sorted(Path(args.dir).glob("*.toml"))
    if not paths:
        print(f"no scenario files in {args.dir}", file=sys.stderr)
        return 1
    rows = emit_batch(paths, args.out, jobs=args.jobs)
    for row in rows:
        print(f"{row['name']:20s} {row['status']:6s} {row['error']}")
    return 0 if all(r["status"] == "pass" for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funnelcruise",
                                     description="Funnel cruise control simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one scenario and check its invariants")
    p.add_argument("--scenario", required=True, help="scenario file or preset:1|2|3")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--saturate", nargs=2, type=float, metavar=("UMIN", "UMAX"),
                   help="clamp the applied force to [UMIN, UMAX] N")
    p.add_argument("--tol", type=float, help="relative integration tolerance")
    p.add_argument("--output-dt", type=float, help="output sampling interval [s]")
    p.add_argument("--check", action=argparse.BooleanOptionalAction, default=True,
                   help="exit non-zero when an invariant fails (default: on)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a scenario without simulating")
    p.add_argument("--scenario", required=True, help="scenario file or preset:1|2|3")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("batch", help="simulate every *.toml file in a directory")
    p.add_argument("--dir", required=True, help="directory of scenario files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FunnelCruiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
