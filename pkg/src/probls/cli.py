"""Command line entry point: ``probls run`` and ``probls summarize``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .harness import (
    ConfigError,
    TraceError,
    expand_globs,
    parse_config,
    render_summary,
    run_experiment,
    summarize,
    write_atomic,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4
OUTPUT_ENV = "PROBLS_OUTPUT_DIR"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="probls", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid from a config file")
    run.add_argument("config")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--out", help=f"output directory (default: config, then ${OUTPUT_ENV}, then ./results)")
    run.add_argument("--seed-offset", type=int, default=0)

    summ = sub.add_parser("summarize", help="aggregate trace files into a summary CSV")
    summ.add_argument("traces", nargs="+", help="trace files or glob patterns")
    summ.add_argument("--out", help="write the summary here instead of stdout")
    return p


def _run(args) -> int:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output_dir or os.environ.get(OUTPUT_ENV) or "results"
    try:
        paths = run_experiment(cfg, Path(out), jobs=args.jobs, seed_offset=args.seed_offset)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - any optimizer failure maps to one exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(paths)} traces and {Path(out) / 'summary.csv'}")
    return EXIT_OK


def _summarize(args) -> int:
    paths = expand_globs(args.traces)
    try:
        text = render_summary(summarize(paths))
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.out:
        try:
            write_atomic(Path(args.out), text)
        except OSError as exc:
            print(f"io error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return _run(args) if args.command == "run" else _summarize(args)


if __name__ == "__main__":
    sys.exit(main())
