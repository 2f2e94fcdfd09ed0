"""Command line entry point: ``zapvss run`` and ``zapvss list-algorithms``."""
from __future__ import annotations

import argparse
import logging
import sys
import time

from . import __version__
from .config import ALGORITHMS, ConfigError, load_config
from .harness import DivergenceError, aggregate_runs, emit_csv, run_scenario, summarize
from .kernel import BACKEND

EXIT_OK, EXIT_ERROR, EXIT_DIVERGED = 0, 1, 2

log = logging.getLogger("zapvss")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer: {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zapvss", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment and write CSV traces")
    run.add_argument("--config", required=True,
                     help="config file; a bare name such as reference.cfg also finds the shipped copy")
    run.add_argument("--out", help="output directory (overrides out_dir)")
    run.add_argument("--seed", type=_u64, help="base seed (overrides seed)")
    run.add_argument("--runs", type=_positive, help="number of runs (overrides runs)")
    run.add_argument("--workers", type=_positive, help="worker processes (overrides workers)")
    run.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    sub.add_parser("list-algorithms", help="print the known algorithm names")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {k: v for k, v in (("out_dir", args.out), ("seed", args.seed),
                                   ("runs", args.runs), ("workers", args.workers)) if v is not None}
    if overrides:
        config = config.replace(**overrides)
    log.info("backend=%s scenario=%s runs=%d algorithms=%s", BACKEND, config.scenario,
             config.runs, ",".join(config.algorithms))
    start = time.perf_counter()
    traces = run_scenario(config)
    log.info("finished in %.1f s", time.perf_counter() - start)
    trace_path, summary_path = emit_csv(traces, config.out_dir, config.n_samples, config.switch_at)
    for algorithm, segment, m, k in summarize(aggregate_runs(traces), config.n_samples,
                                              config.switch_at):
        print(f"{algorithm:14s} {segment:4s} misalignment {m:8.2f} dB  kappa {k:.3e}")
    print(f"wrote {trace_path} and {summary_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-algorithms":
        print("\n".join(ALGORITHMS))
        return EXIT_OK
    try:
        return _cmd_run(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
