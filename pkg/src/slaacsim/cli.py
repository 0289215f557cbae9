"""Command-line front end: run a scenario, write trace/metrics, check
scripted expectations.

Exit status: 0 clean run (and all expectations met under --check), 1 on
parse/validation/expectation failure, 2 on an internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import SimInvariantError
from .scenario import (
    ScenarioError,
    build_engine,
    evaluate_expects,
    parse_scenario,
    print_scenario,
)


def run_command(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="slaacsim")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", type=Path)
    run.add_argument("--trace", type=Path, help="write the event trace here")
    run.add_argument("--metrics", type=Path, help="write run metrics here")
    run.add_argument("--check", action="store_true", help="verify the scenario's expect lines")
    run.add_argument("--dump-normalized", action="store_true",
                     help="print the canonical scenario text and exit")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    args = parser.parse_args(argv)

    try:
        scenario = parse_scenario(args.scenario.read_text())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 1

    if args.dump_normalized:
        sys.stdout.write(print_scenario(scenario))
        return 0

    engine = build_engine(scenario, seed=args.seed)
    try:
        metrics = engine.execute(scenario.run_ms)
    except SimInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2

    if args.trace is not None:
        args.trace.write_text(engine.trace_text())
    if args.metrics is not None:
        args.metrics.write_text("".join(line + "\n" for line in metrics.to_lines()))
    for line in metrics.flag_lines():
        print(line)

    if args.check:
        failures = evaluate_expects(scenario, metrics)
        if failures:
            for failure in failures:
                print(f"check failed: {failure}", file=sys.stderr)
            return 1
        print(f"check ok ({len(scenario.expects)} expectation(s))")
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
