"""Label normalization, MSE metrics, and comparison reports.

Targets are the 4-vector q = [nu_tls, g, T1_tls, Tphi_tls].  Losses are
reported both in raw units (GHz^2 / ns^2) and on the normalized [1, 10]
scale, since the two differ by many orders of magnitude for the T times.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import DegenerateColumn, IndexMismatch

PARAM_NAMES = ("nu_tls", "g", "T1_tls", "Tphi_tls")
NORM_LO, NORM_HI = 1.0, 10.0


def normalize_labels(Q: np.ndarray, bounds=None):
    """Affine map of each column onto [1, 10].

    q_norm = 1 + 9 (q - q_min) / (q_max - q_min), with bounds taken from
    the data unless given (training-split convention).  Out-of-bounds
    values map outside [1, 10] on purpose, so extrapolation stays visible.
    Returns (Q_norm, (q_min, q_max)).
    """
    Q = np.asarray(Q, dtype=float)
    if bounds is None:
        q_min, q_max = Q.min(axis=0), Q.max(axis=0)
    else:
        q_min, q_max = (np.asarray(b, dtype=float) for b in bounds)
    if np.any(q_max <= q_min):
        bad = [PARAM_NAMES[i] for i in np.flatnonzero(q_max <= q_min)]
        raise DegenerateColumn(f"q_max <= q_min for column(s) {bad}")
    Q_norm = NORM_LO + (NORM_HI - NORM_LO) * (Q - q_min) / (q_max - q_min)
    return Q_norm, (q_min, q_max)


def denormalize_labels(Q_norm: np.ndarray, bounds) -> np.ndarray:
    """Exact inverse of normalize_labels for the given bounds."""
    q_min, q_max = (np.asarray(b, dtype=float) for b in bounds)
    return q_min + (np.asarray(Q_norm, dtype=float) - NORM_LO) * (
        q_max - q_min
    ) / (NORM_HI - NORM_LO)


@dataclass
class PredictionTable:
    """Predictions q_hat per sample; NaN marks an absent component.

    `source` tags the producer ("cnn" or "analytic").  `bounds` records
    the normalization bounds the producer used, when any.
    """

    indices: np.ndarray
    Q_hat: np.ndarray
    source: str
    bounds: tuple | None = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.Q_hat = np.asarray(self.Q_hat, dtype=float)
        if self.Q_hat.shape != (len(self.indices), len(PARAM_NAMES)):
            raise ValueError("prediction matrix must be (n, 4)")


def _align(table: PredictionTable, label_indices, label_Q):
    label_indices = np.asarray(label_indices, dtype=int)
    order = {int(idx): row for row, idx in enumerate(label_indices)}
    try:
        rows = [order[int(idx)] for idx in table.indices]
    except KeyError as exc:
        raise IndexMismatch(f"prediction references unknown sample {exc}") from exc
    return np.asarray(label_Q, dtype=float)[rows]


def mse(
    table: PredictionTable,
    label_indices,
    label_Q,
    scale: str = "raw",
    bounds=None,
) -> dict:
    """Per-parameter MSE and the combined loss (mean over 4N components).

    scale "normalized" transforms both sides through normalize_labels
    first; bounds default to the table's stored bounds, else to the label
    data itself.  Components absent from the predictions (NaN) yield NaN
    per-parameter entries and are excluded from the combined loss.
    """
    if scale not in ("raw", "normalized"):
        raise ValueError(f"unknown scale {scale!r}")
    targets = _align(table, label_indices, label_Q)
    predictions = table.Q_hat

    if scale == "normalized":
        use_bounds = bounds or table.bounds
        if use_bounds is None:
            _, use_bounds = normalize_labels(targets)
        targets, _ = normalize_labels(targets, use_bounds)
        predictions, _ = normalize_labels(predictions, use_bounds)

    squared = (predictions - targets) ** 2
    present = ~np.isnan(squared)
    per_param = np.full(len(PARAM_NAMES), np.nan)
    for j in range(len(PARAM_NAMES)):
        if present[:, j].any():
            per_param[j] = squared[present[:, j], j].mean()
    combined = squared[present].sum() / squared.size if present.all() else math.nan
    return {
        "per_param": per_param,
        "combined": float(combined),
        "scale": scale,
        "n": len(table.indices),
    }


def mse_report(results: dict[str, dict]) -> str:
    """Text table, parameters as rows and models as columns.

    `results` maps a model/source name to an mse() result; absent
    components render as "absent".
    """
    names = list(results)
    width = 14
    header = "parameter".ljust(12) + "".join(n.rjust(width) for n in names)
    lines = [header, "-" * len(header)]
    for j, pname in enumerate(PARAM_NAMES):
        cells = []
        for n in names:
            value = results[n]["per_param"][j]
            cells.append(("absent" if math.isnan(value) else f"{value:.6g}").rjust(width))
        lines.append(pname.ljust(12) + "".join(cells))
    combined_cells = []
    for n in names:
        value = results[n]["combined"]
        combined_cells.append(
            ("absent" if math.isnan(value) else f"{value:.6g}").rjust(width)
        )
    lines.append("combined L".ljust(12) + "".join(combined_cells))
    return "\n".join(lines)


def error_vs_detuning(detunings, errors, n_bins: int = 5) -> dict:
    """Binned |detuning| vs absolute-error summary plus rank correlation.

    Returns bins (each with count, median, p90) and the Spearman
    correlation between |detuning| and error magnitude.
    """
    detunings = np.abs(np.asarray(detunings, dtype=float))
    errors = np.abs(np.asarray(errors, dtype=float))
    if len(detunings) != len(errors):
        raise IndexMismatch("detuning and error vectors differ in length")
    edges = np.linspace(detunings.min(), detunings.max(), n_bins + 1)
    bins = []
    populated = 0
    for k in range(n_bins):
        hi_inclusive = k == n_bins - 1
        mask = (detunings >= edges[k]) & (
            detunings <= edges[k + 1] if hi_inclusive else detunings < edges[k + 1]
        )
        entry = {
            "lo": float(edges[k]),
            "hi": float(edges[k + 1]),
            "count": int(mask.sum()),
            "median": float(np.median(errors[mask])) if mask.any() else math.nan,
            "p90": float(np.percentile(errors[mask], 90)) if mask.any() else math.nan,
        }
        populated += mask.any()
        bins.append(entry)
    if populated < 2:
        raise ValueError("need at least two populated bins")
    if np.ptp(detunings) == 0 or np.ptp(errors) == 0:
        rho = 0.0  # rank correlation of a constant vector is undefined
    else:
        rho = stats.spearmanr(detunings, errors).statistic
    return {"bins": bins, "spearman": float(rho)}


def scatter_export(
    table: PredictionTable, label_indices, label_Q, path: Path, scale: str = "raw"
) -> None:
    """CSV of (index, parameter, target, prediction, scale) rows.

    Values are written with 17 significant digits so parsing recovers
    them exactly.
    """
    targets = _align(table, label_indices, label_Q)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "parameter", "target", "prediction", "scale"])
        for row, idx in enumerate(table.indices):
            for j, pname in enumerate(PARAM_NAMES):
                writer.writerow(
                    [
                        int(idx),
                        pname,
                        f"{targets[row, j]:.17g}",
                        f"{table.Q_hat[row, j]:.17g}",
                        scale,
                    ]
                )


def write_predictions_csv(table: PredictionTable, path: Path) -> None:
    """Prediction CSV shared with the CNN trainer; bounds as a sidecar."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "source", *PARAM_NAMES])
        for row, idx in enumerate(table.indices):
            cells = [
                "" if math.isnan(v) else f"{v:.17g}" for v in table.Q_hat[row]
            ]
            writer.writerow([int(idx), table.source, *cells])
    if table.bounds is not None:
        sidecar = path.with_suffix(".bounds.json")
        q_min, q_max = table.bounds
        sidecar.write_text(
            json.dumps({"q_min": list(map(float, q_min)), "q_max": list(map(float, q_max))})
        )


def read_predictions_csv(path: Path) -> PredictionTable:
    path = Path(path)
    indices, rows, source = [], [], "unknown"
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["index", "source"]:
            raise IndexMismatch(f"{path}: unexpected header {header}")
        for record in reader:
            indices.append(int(record[0]))
            source = record[1]
            rows.append([float(v) if v else math.nan for v in record[2:6]])
    bounds = None
    sidecar = path.with_suffix(".bounds.json")
    if sidecar.exists():
        data = json.loads(sidecar.read_text())
        bounds = (np.asarray(data["q_min"]), np.asarray(data["q_max"]))
    return PredictionTable(
        indices=np.asarray(indices), Q_hat=np.asarray(rows), source=source, bounds=bounds
    )
