"""
locpir-bench: parameter sweeps, the per-phase timing table and size accounting.
"""

import argparse
import logging
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from ..bench import (
    DEFAULT_GATE_DELAY_MS,
    load_bench_config,
    parse_int_list,
    phase_table,
    plot_sweep,
    reports_to_frame,
    run_sweep,
    size_report,
)
from ..config import Config, configure_logging
from ..models.bench import BenchConfig
from ..utils.stopwatch import Stopwatch

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Benchmark LocPIR gate counts and timings")
    parser.add_argument(
        "--mode", choices=("sweep", "phases", "sizes"), default="sweep", help="What to run"
    )
    parser.add_argument("--config", "-c", help="key=value bench file (SECURITY, N, L, M, THREADS, ...)")
    parser.add_argument("--out", "-o", help="CSV file to write (default: print)")
    parser.add_argument("--security", help="Security levels, e.g. 80,128")
    parser.add_argument("--N", dest="n_regions", help="Region counts, e.g. 4..28:4")
    parser.add_argument("--l", dest="lengths", help="Coordinate lengths, e.g. 8,16,24,32")
    parser.add_argument("--m", dest="service_bits", help="Service lengths, e.g. 9")
    parser.add_argument("--threads", help="Worker counts, e.g. 1..6")
    parser.add_argument("--engine", choices=("clear", "tlwe-oracle"), help="Gate engine")
    parser.add_argument("--delay", type=float, help="Simulated milliseconds per bootstrap unit")
    parser.add_argument(
        "--realize-delay", action="store_true", help="Sleep for the delay and report wall clock"
    )
    parser.add_argument("--plot", help="Write a PNG of total time against N")
    return parser


def _overrides(args: argparse.Namespace, config: Config) -> dict:
    values = {
        "n_regions": args.n_regions,
        "lengths": args.lengths,
        "service_bits": args.service_bits,
        "threads": args.threads,
    }
    overrides = {k: parse_int_list(v) for k, v in values.items() if v}
    if args.security:
        overrides["security"] = [f"sec{v}" for v in parse_int_list(args.security)]
    overrides["engine"] = args.engine
    overrides["per_gate_delay_ms"] = args.delay
    overrides["realize_delay"] = args.realize_delay or None
    overrides["seed"] = config.seed
    return {k: v for k, v in overrides.items() if v is not None}


def build_config(args: argparse.Namespace, config: Config) -> BenchConfig:
    overrides = _overrides(args, config)
    if args.config:
        return load_bench_config(args.config, **overrides)
    overrides.setdefault("per_gate_delay_ms", DEFAULT_GATE_DELAY_MS)
    return BenchConfig(**overrides)


def main(argv: Optional[Sequence[str]] = None):
    """Main entry point for the benchmark."""
    args = build_parser().parse_args(argv)
    config = Config()
    configure_logging(config.log_level, config.log_file)

    try:
        with Stopwatch() as stopwatch:
            if args.mode == "sizes":
                frame = size_report()
            elif args.mode == "phases":
                frame = phase_table(
                    seed=config.seed,
                    per_gate_delay_ms=args.delay if args.delay is not None else DEFAULT_GATE_DELAY_MS,
                    engine=args.engine or "clear",
                )
            else:
                bench_config = build_config(args, config)
                frame = reports_to_frame(run_sweep(bench_config))
                if args.plot:
                    plot_sweep(frame, args.plot)

        if args.out:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(args.out, index=False)
            logger.info("Wrote %d rows to %s", len(frame), args.out)
        else:
            with pd.option_context("display.max_columns", None, "display.width", 200):
                print(frame.to_string(index=False))

        logger.info("Benchmark time: %dms", stopwatch.elapsed_ms())
        return frame

    except Exception as e:
        logger.error("Error in benchmark: %s", str(e))
        raise


if __name__ == "__main__":
    main()
