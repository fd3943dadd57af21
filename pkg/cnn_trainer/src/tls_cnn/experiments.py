"""M1/M2/M3 experiment orchestration.

M1 trains and tests on clean maps, M2 evaluates the M1 model on noisy
test maps, M3 trains and tests on noisy maps.  Metrics are never
computed here: predictions are exported as CSV and scored by the
simulator package's `evaluate` command, which is the single source of
truth; this module only parses the returned table into the summary.
"""

from __future__ import annotations

import csv
import json
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .data import PARAM_NAMES, denormalize, load_dataset, normalize, split_indices
from .model import ModelSpec, build_model
from .train import predict, train

CNN_SOURCE = "cnn"


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    train_noise: str
    test_noise: str

    def __post_init__(self):
        allowed = {
            "M1": ("clean", "clean"),
            "M2": ("clean", "noisy"),
            "M3": ("noisy", "noisy"),
        }
        if allowed.get(self.id) != (self.train_noise, self.test_noise):
            raise ValueError(f"inconsistent experiment spec {self}")


M1 = ExperimentSpec("M1", "clean", "clean")
M2 = ExperimentSpec("M2", "clean", "noisy")
M3 = ExperimentSpec("M3", "noisy", "noisy")
EXPERIMENTS = {"M1": M1, "M2": M2, "M3": M3}


def export_predictions(path, indices, raw, normalized, bounds, source=CNN_SOURCE):
    """Prediction CSV in the evaluator's schema: raw columns first, the
    normalized values appended as extra columns; bounds as a sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["index", "source", *PARAM_NAMES, *(f"{p}_norm" for p in PARAM_NAMES)]
        )
        for row, idx in enumerate(indices):
            writer.writerow(
                [
                    int(idx),
                    source,
                    *(f"{v:.17g}" for v in raw[row]),
                    *(f"{v:.17g}" for v in normalized[row]),
                ]
            )
    q_min, q_max = bounds
    path.with_suffix(".bounds.json").write_text(
        json.dumps({"q_min": list(map(float, q_min)), "q_max": list(map(float, q_max))})
    )


def _evaluator_command() -> list[str]:
    exe = shutil.which("tls-spectro")
    if exe:
        return [exe]
    return [sys.executable, "-m", "tls_spectro.cli"]


def evaluate_with_simulator(dataset_dir, predictions_csv, report_path) -> dict:
    """Run the simulator's `evaluate` CLI and parse its metric table.

    Returns {"raw": {param: mse}, "normalized": {param: mse}} with NaN
    for components marked absent.
    """
    command = _evaluator_command() + [
        "evaluate",
        "--data",
        str(dataset_dir),
        "--pred",
        str(predictions_csv),
        "--out",
        str(report_path),
    ]
    proc = subprocess.run(command, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"evaluate failed: {proc.stderr.strip()}")
    return parse_metric_table(proc.stdout)


def parse_metric_table(text: str) -> dict:
    metrics = {"raw": {}, "normalized": {}}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) == 3 and parts[0] in PARAM_NAMES:
            for scale, cell in zip(("raw", "normalized"), parts[1:]):
                metrics[scale][parts[0]] = (
                    float("nan") if cell == "absent" else float(cell)
                )
    missing = [p for p in PARAM_NAMES if p not in metrics["raw"]]
    if missing:
        raise RuntimeError(f"could not parse metric rows for {missing}")
    return metrics


def run_experiments(
    clean_dir: Path,
    noisy_dir: Path,
    out_dir: Path,
    seed: int = 0,
    spec: ModelSpec | None = None,
    max_epochs: int | None = None,
    experiments=("M1", "M2", "M3"),
) -> dict:
    """Train/evaluate the requested experiments; returns the metrics dict.

    Writes per-experiment predictions, checkpoints, training history,
    evaluation reports, and a Table-I-style summary under out_dir.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    datasets = {}
    for tag, directory in (("clean", clean_dir), ("noisy", noisy_dir)):
        maps, labels, manifest = load_dataset(directory)
        datasets[tag] = {
            "dir": Path(directory),
            "maps": maps,
            "labels": labels,
            "splits": split_indices(len(maps)),
        }
    if not np.allclose(datasets["clean"]["labels"], datasets["noisy"]["labels"]):
        raise ValueError("clean and noisy datasets must share parameter draws")

    train_kwargs = {} if max_epochs is None else {"max_epochs": max_epochs}
    models = {}
    metrics = {}

    def _train_for(noise_tag, model_seed):
        data = datasets[noise_tag]
        splits = data["splits"]
        # normalization bounds come from the training split only
        _, bounds = normalize(data["labels"][splits["train"]])
        targets, _ = normalize(data["labels"], bounds)
        assert not set(splits["test"]) & set(splits["train"])
        assert not set(splits["test"]) & set(splits["val"])
        torch.manual_seed(model_seed)  # weight init must be seeded too
        model = build_model(spec)
        result = train(
            model,
            data["maps"][splits["train"]],
            targets[splits["train"]],
            data["maps"][splits["val"]],
            targets[splits["val"]],
            seed=model_seed,
            checkpoint_path=out_dir / f"model_{noise_tag}.pt",
            **train_kwargs,
        )
        return model, bounds, result

    for exp_id in experiments:
        exp = EXPERIMENTS[exp_id]
        if exp.train_noise not in models:
            models[exp.train_noise] = _train_for(
                exp.train_noise, seed + (0 if exp.train_noise == "clean" else 1)
            )
        model, bounds, _ = models[exp.train_noise]

        test_data = datasets[exp.test_noise]
        test_idx = test_data["splits"]["test"]
        predicted_norm = predict(model, test_data["maps"][test_idx])
        predicted_raw = denormalize(predicted_norm, bounds)
        pred_path = out_dir / f"predictions_{exp.id}.csv"
        export_predictions(pred_path, test_idx, predicted_raw, predicted_norm, bounds)
        metrics[exp.id] = evaluate_with_simulator(
            test_data["dir"], pred_path, out_dir / f"report_{exp.id}.txt"
        )

    if "M1" in metrics:
        metrics["baseline"] = _mean_predictor_baseline(datasets["clean"], out_dir)

    (out_dir / "metrics.json").write_text(json.dumps(metrics, indent=1))
    (out_dir / "summary.txt").write_text(format_summary(metrics))
    return metrics


def _mean_predictor_baseline(data, out_dir) -> dict:
    """Score a train-split mean predictor through the same CSV pipeline."""
    splits = data["splits"]
    _, bounds = normalize(data["labels"][splits["train"]])
    mean_norm = normalize(data["labels"][splits["train"]], bounds)[0].mean(axis=0)
    test_idx = splits["test"]
    norm = np.tile(mean_norm, (len(test_idx), 1))
    raw = denormalize(norm, bounds)
    pred_path = out_dir / "predictions_baseline.csv"
    export_predictions(pred_path, test_idx, raw, norm, bounds, source="baseline")
    return evaluate_with_simulator(
        data["dir"], pred_path, out_dir / "report_baseline.txt"
    )


def format_summary(metrics: dict) -> str:
    """Table-I-shaped summary: parameter rows, experiment columns."""
    columns = [k for k in ("M1", "M2", "M3", "baseline") if k in metrics]
    lines = []
    for scale in ("normalized", "raw"):
        lines.append(f"MSE ({scale} scale)")
        header = "parameter".ljust(12) + "".join(c.rjust(16) for c in columns)
        lines += [header, "-" * len(header)]
        for param in PARAM_NAMES:
            cells = [f"{metrics[c][scale][param]:.6g}".rjust(16) for c in columns]
            lines.append(param.ljust(12) + "".join(cells))
        lines.append("")
    return "\n".join(lines)
