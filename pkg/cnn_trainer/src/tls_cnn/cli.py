"""Command-line entry: run M1/M2/M3 on generated datasets."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, format_summary, run_experiments


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tls-cnn",
        description="Train/evaluate the spectroscopy CNN regressor",
    )
    parser.add_argument(
        "--experiment",
        choices=[*EXPERIMENTS, "all"],
        default="all",
        help="which experiment to run (M2 reuses the M1 model)",
    )
    parser.add_argument("--data-clean", required=True, help="clean dataset dir")
    parser.add_argument("--data-noisy", required=True, help="noisy dataset dir")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--max-epochs", type=int, default=None,
                        help="cap training epochs (default: early stopping)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    wanted = tuple(EXPERIMENTS) if args.experiment == "all" else (args.experiment,)
    metrics = run_experiments(
        clean_dir=Path(args.data_clean),
        noisy_dir=Path(args.data_noisy),
        out_dir=Path(args.out),
        seed=args.seed,
        max_epochs=args.max_epochs,
        experiments=wanted,
    )
    print(format_summary(metrics))
    return 0


if __name__ == "__main__":
    sys.exit(main())
