"""Command-line entry point for the alert-to-attack-graph pipeline."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .automaton import LearnParams
from .pipeline import STAGES, PipelineConfig, StageError, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alertgraphs",
        description="Transform raw IDS alerts into per-victim, per-objective attack graphs.",
    )
    parser.add_argument("--alerts", nargs="+", required=True, type=Path, metavar="PATH",
                        help="alert log file(s)")
    parser.add_argument("--format", choices=("eve-json", "csv"), default="eve-json")
    parser.add_argument("--sig-map", type=Path, default=None, metavar="PATH",
                        help="signature rule file (PATTERN<TAB>STAGE per line)")
    parser.add_argument("--port-map", type=Path, default=None, metavar="PATH",
                        help="IANA-format service-names CSV")
    parser.add_argument("--t", type=float, default=1.0, metavar="SECS",
                        help="duplicate-suppression window (default 1.0)")
    parser.add_argument("--w", type=float, default=150.0, metavar="SECS",
                        help="episode aggregation window (default 150)")
    parser.add_argument("--symbol-count", type=int, default=5, metavar="N")
    parser.add_argument("--state-count", type=int, default=5, metavar="N")
    parser.add_argument("--sink-count", type=int, default=5, metavar="N")
    parser.add_argument("--alpha", type=float, default=0.05, metavar="F",
                        help="significance level of the merge test (default 0.05)")
    parser.add_argument("--split", type=float, default=0.8, metavar="F",
                        help="train fraction for the perplexity report (default 0.8)")
    parser.add_argument("--seed", type=int, default=0, metavar="N",
                        help="seed for the train/test shuffle (default 0)")
    parser.add_argument("--out", required=True, type=Path, metavar="DIR")
    parser.add_argument("--stop-after", choices=STAGES, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        alerts=list(args.alerts),
        out_dir=args.out,
        format=args.format,
        sig_map=args.sig_map,
        port_map=args.port_map,
        t=args.t,
        w=args.w,
        learn=LearnParams(
            symbol_count=args.symbol_count,
            state_count=args.state_count,
            sink_count=args.sink_count,
            alpha=args.alpha,
        ),
        split=args.split,
        seed=args.seed,
        stop_after=args.stop_after,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    try:
        result = run_pipeline(cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"parsed {result.parse_stats.parsed}/{result.parse_stats.total} alerts "
        f"({result.parse_stats.skipped} skipped), kept {len(result.filtered_alerts)} "
        f"after de-duplication; wrote {len(result.artifacts)} artifact(s) to {cfg.out_dir}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
