"""Command-line frontend: generate / estimate / evaluate / render.

Every subcommand persists its effective configuration (defaults
included) alongside its outputs, so any run can be reproduced from the
artifacts alone.  Exit codes: 0 success, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import estimator, evaluation
from .errors import TlsSpectroError
from .spectroscopy import ProtocolConfig

ESTIMATE_COLUMNS = [
    "index",
    "valid",
    "reject_reason",
    "nu_tls_hat",
    "g_hat",
    "nu_q_dressed_obs",
    "nu_tls_dressed_obs",
    "detuning_dressed_obs",
    "c1",
    "c2",
    "c3",
    "c4",
    "c5",
    "residual_rms",
]


def _parse_grid(text: str) -> tuple[float, float, int]:
    """Parse 'lo:hi:n' (inclusive endpoints) into a grid tuple."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return (lo, hi, n)


def _default_parallelism() -> int:
    env = os.environ.get("TLS_SPECTRO_THREADS")
    return int(env) if env else 1


def _persist_config(path: Path, args: argparse.Namespace) -> None:
    payload = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func"
    }
    path.write_text(json.dumps(payload, indent=1))


def cmd_generate(args) -> int:
    out_dir = Path(args.out)
    if (out_dir / "manifest.json").exists():
        print(f"error: {out_dir} already holds a dataset", file=sys.stderr)
        return 1
    config = ProtocolConfig(
        omega_grid=args.grid_omega, time_grid=args.grid_t, A=args.amplitude
    )
    ds.generate_dataset(
        n=args.n,
        config=config,
        noise_mode=args.noise,
        seed=args.seed,
        out_dir=out_dir,
        parallelism=args.parallelism,
        engine=args.engine,
        export_pngs=args.png,
    )
    _persist_config(out_dir / "run_config.json", args)
    print(f"wrote {args.n} samples to {out_dir}")
    return 0


def cmd_estimate(args) -> int:
    data_dir = Path(args.data)
    manifest_path = data_dir / "manifest.json"
    if not manifest_path.exists():
        print(f"error: no manifest at {manifest_path}", file=sys.stderr)
        return 1
    manifest = ds.DatasetManifest.load(manifest_path)

    out_path = Path(args.out)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ESTIMATE_COLUMNS)
        for index in range(manifest.count):
            label, spec_map = ds.load_sample(data_dir, manifest, index)
            result = estimator.estimate(
                spec_map,
                (manifest.nu_q, label.q[0]),
                A=manifest.amplitude,
                window=args.window,
            )
            fit = result.fit
            row = [
                index,
                result.valid,
                result.reject_reason or "",
                *(
                    "" if v is None else f"{v:.17g}"
                    for v in (
                        result.nu_tls_hat,
                        result.g_hat,
                        result.nu_q_dressed_obs,
                        result.nu_tls_dressed_obs,
                        result.detuning_dressed_obs,
                    )
                ),
            ]
            if fit is None:
                row += [""] * 6
            else:
                row += [
                    f"{v:.17g}"
                    for v in (fit.c1, fit.c2, fit.c3, fit.c4, fit.c5, fit.residual_rms)
                ]
            writer.writerow(row)
    _persist_config(out_path.with_suffix(".config.json"), args)
    print(f"wrote estimates for {manifest.count} samples to {out_path}")
    return 0


def _estimates_to_table(path: Path) -> evaluation.PredictionTable:
    """Adapt the estimator's diagnostics CSV into a PredictionTable."""
    indices, rows = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for record in reader:
            indices.append(int(record["index"]))
            if record["valid"] == "True":
                rows.append(
                    [
                        float(record["nu_tls_hat"]),
                        float(record["g_hat"]),
                        math.nan,
                        math.nan,
                    ]
                )
            else:
                rows.append([math.nan] * 4)
    return evaluation.PredictionTable(
        indices=np.asarray(indices), Q_hat=np.asarray(rows), source="analytic"
    )


def _load_prediction_table(path: Path) -> evaluation.PredictionTable:
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
    if header[:2] == ["index", "source"]:
        return evaluation.read_predictions_csv(path)
    if header[:2] == ["index", "valid"]:
        return _estimates_to_table(path)
    raise TlsSpectroError(f"{path}: unrecognized prediction schema {header[:3]}")


def cmd_evaluate(args) -> int:
    data_dir = Path(args.data)
    manifest_path = data_dir / "manifest.json"
    if not manifest_path.exists():
        print(f"error: no manifest at {manifest_path}", file=sys.stderr)
        return 1
    manifest = ds.DatasetManifest.load(manifest_path)
    table = _load_prediction_table(Path(args.pred))

    labels = manifest.labels()
    label_Q = np.array([lab.q for lab in labels])
    label_indices = np.arange(manifest.count)

    results = {}
    for scale in ("raw", "normalized"):
        results[f"{table.source}/{scale}"] = evaluation.mse(
            table, label_indices, label_Q, scale=scale
        )
    report = evaluation.mse_report(results)
    print(report)
    if args.out:
        Path(args.out).write_text(report + "\n")
        _persist_config(Path(args.out).with_suffix(".config.json"), args)
    return 0


def cmd_render(args) -> int:
    data_dir = Path(args.data)
    manifest_path = data_dir / "manifest.json"
    if not manifest_path.exists():
        print(f"error: no manifest at {manifest_path}", file=sys.stderr)
        return 1
    manifest = ds.DatasetManifest.load(manifest_path)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    indices = range(manifest.count) if args.all else args.index
    if not indices and not args.all:
        print("error: pass --all or at least one --index", file=sys.stderr)
        return 2
    for index in indices:
        record = manifest.records[index]
        source = data_dir / record["file"]
        if not source.exists():
            print(f"error: missing sample file {source}", file=sys.stderr)
            return 1
        _, spec_map = ds.load_sample(data_dir, manifest, index)
        ds.export_png(spec_map, out_dir / f"sample_{index:05d}.png")
    _persist_config(out_dir / "render_config.json", args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tls-spectro",
        description="Transmon-TLS spectroscopy simulator and estimator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a labeled dataset")
    gen.add_argument("--n", type=int, required=True, help="number of samples")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--noise", choices=["clean", "noisy"], default="clean")
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--grid-omega", type=_parse_grid, default=(6.6, 7.4, 100),
                     help="drive-frequency grid lo:hi:n in GHz")
    gen.add_argument("--grid-t", type=_parse_grid, default=(0.0, 500.0, 100),
                     help="pulse-A duration grid lo:hi:n in ns")
    gen.add_argument("--amplitude", type=float, default=0.02,
                     help="drive amplitude in GHz")
    gen.add_argument("--parallelism", type=int, default=_default_parallelism())
    gen.add_argument("--engine", choices=["expm", "rk45"], default="expm")
    gen.add_argument("--png", action="store_true", help="also export PNGs")
    gen.set_defaults(func=cmd_generate)

    est = sub.add_parser("estimate", help="run the analytical estimator")
    est.add_argument("--data", required=True, help="dataset directory")
    est.add_argument("--out", required=True, help="output CSV path")
    est.add_argument("--window", type=float, default=estimator.DEFAULT_PEAK_WINDOW,
                     help="peak search half-window in GHz")
    est.set_defaults(func=cmd_estimate)

    ev = sub.add_parser("evaluate", help="score predictions against labels")
    ev.add_argument("--data", required=True, help="dataset directory")
    ev.add_argument("--pred", required=True, help="predictions or estimates CSV")
    ev.add_argument("--out", help="also write the report to this path")
    ev.set_defaults(func=cmd_evaluate)

    ren = sub.add_parser("render", help="export spectroscopy maps as PNGs")
    ren.add_argument("--data", required=True, help="dataset directory")
    ren.add_argument("--out", required=True, help="output directory")
    ren.add_argument("--index", type=int, action="append", default=[])
    ren.add_argument("--all", action="store_true")
    ren.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TlsSpectroError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
