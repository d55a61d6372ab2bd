"""Command line entry point: ``netclt run | list | verify``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .runner import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, OUTPUT_ENV, run_scenario
from .scenarios import BUILTIN, builtin_config, list_scenarios

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netclt",
        description="Joint normality experiments for standardized means on double sequences.",
        epilog=f"The output root can also be set with the {OUTPUT_ENV} environment variable.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per path point")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a config file")
    run.add_argument("config", help="config file, or the name of a built-in scenario")
    run.add_argument("--output-dir", default=None, help="output root (overrides config and environment)")

    sub.add_parser("list", help="list built-in scenarios")

    verify = sub.add_parser("verify", help="run every built-in scenario and check its expected verdict")
    verify.add_argument("--output-dir", default=None, help="output root (overrides the environment)")
    verify.add_argument("--only", nargs="+", choices=BUILTIN, metavar="NAME", help="restrict to these scenarios")
    return parser


def _resolve(spec: str):
    if spec in BUILTIN:
        return builtin_config(spec)
    return load_config(spec)


def _report(result) -> str:
    flag = "OK" if result.exit_code == EXIT_OK else "MISMATCH"
    return f"{flag:8s} {result.scenario:30s} expected={result.expected} observed={result.observed} status={result.status}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "list":
        for name, description in list_scenarios():
            print(f"{name:30s} {description}")
        return EXIT_OK

    if args.command == "run":
        try:
            config = _resolve(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        result = run_scenario(config, args.output_dir)
        print(_report(result))
        print(f"artifacts: {result.directory}")
        return result.exit_code

    names = args.only or BUILTIN
    worst = EXIT_OK
    for name in names:
        result = run_scenario(builtin_config(name), args.output_dir)
        print(_report(result), flush=True)
        if result.exit_code != EXIT_OK:
            worst = EXIT_MISMATCH
    print("verify:", "all scenarios matched" if worst == EXIT_OK else "mismatches found")
    return worst


if __name__ == "__main__":
    sys.exit(main())
