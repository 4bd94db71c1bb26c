"""Command-line entry point.

    noisyrcs <kind> [--config PATH] [--seed INT] [--out DIR] [--threads INT]
                    [--set KEY=VALUE ...] [--verify]
    noisyrcs verify

Results go to stdout as JSON; progress and errors go to stderr.
Exit codes: 0 success, 1 failed check, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import KINDS, ExperimentConfig, apply_overrides, parse_config
from .errors import ConfigError, NoisyRCSError
from .experiments import run_experiment
from .verify import format_report, verify_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyrcs", description="Noisy random circuit sampling laboratory")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", help="run all brute-force cross-checks")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", type=Path, help="config file (sectioned key=value or JSON)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output root; one directory per experiment id")
        p.add_argument("--threads", type=int, help="worker threads for independent tasks")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--verify", action="store_true", help="run the cross-check suite first")
    return parser


def _run_verify(stream=None) -> int:
    results = verify_suite()
    (stream or sys.stdout).write(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig(kind=args.command)
    if args.config:
        cfg = parse_config(args.config.read_text(), base=cfg)
        if cfg.kind != args.command:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
    cfg = apply_overrides(cfg, args.overrides)
    changes = {k: v for k, v in (("seed", args.seed), ("out", args.out), ("threads", args.threads)) if v is not None}
    return cfg.replace(**changes) if changes else cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return _run_verify()
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"noisyrcs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.verify:
        status = _run_verify(sys.stderr)  # stdout stays machine-readable
        if status != EXIT_OK:
            return status
    try:
        record = run_experiment(cfg)
    except ConfigError as exc:
        print(f"noisyrcs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoisyRCSError as exc:
        print(f"noisyrcs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(record.to_json() + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
