"""Command-line experiment runner.

Usage: ``icebox <experiment-id> --config <file> [--set key=value ...] --out <dir>``

Exit codes: 0 success, 1 usage error, 2 capacity guard, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import CapacityError, DomainError, NumericalError, UsageError
from .experiments import EXPERIMENTS, ExperimentConfig, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAPACITY = 2
EXIT_NUMERICAL = 3


def _parse_override(raw: str) -> tuple[str, object]:
    if "=" not in raw:
        raise UsageError(f"override {raw!r} is not of the form key=value")
    key, text = raw.split("=", 1)
    key = key.strip()
    if not key:
        raise UsageError(f"override {raw!r} has an empty key")
    try:
        value = tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        value = text  # bare strings are passed through verbatim
    return key, value


def _load_config(path: Path) -> dict:
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config {path} is not valid TOML: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icebox",
        description="Run a spin-dynamics experiment from a declarative config.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="experiment id")
    parser.add_argument("--config", type=Path, required=True, help="TOML parameter file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        params = _load_config(args.config)
        for raw in args.overrides:
            key, value = _parse_override(raw)
            params[key] = value
        config = ExperimentConfig(experiment=args.experiment, params=params, out_dir=args.out)
        report = run(config)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{args.experiment}: wrote {len(report.manifest)} files to {args.out}")
    for name in report.manifest:
        print(f"  {name}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
