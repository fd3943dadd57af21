"""Dataset loading for the .tlsm map format and its JSON manifest.

The trainer talks to the simulator package only through its published
file formats: binary maps ("TLSM" magic, u32-LE rows, u32-LE cols,
float32-LE row-major pixels) plus `manifest.json` carrying labels.
Targets are the 4-vector [nu_tls, g, T1_tls, Tphi_tls], normalized
column-wise onto [1, 10] with bounds taken from the training split.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"TLSM"
PARAM_NAMES = ("nu_tls", "g", "T1_tls", "Tphi_tls")
NORM_LO, NORM_HI = 1.0, 10.0

# Desk-scale split sizes (70 / 30 proportions plus a held-out test set).
SPLIT_SIZES = {"train": 1400, "val": 600, "test": 200}


class FormatError(Exception):
    """Raised for malformed .tlsm payloads."""


def read_tlsm(path: Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header")
    rows, cols = struct.unpack("<II", raw[4:12])
    if len(raw) != 12 + 4 * rows * cols:
        raise FormatError(f"{path}: size does not match {rows}x{cols} float32")
    return np.frombuffer(raw, dtype="<f4", offset=12).reshape(rows, cols).copy()


def load_dataset(dataset_dir: Path):
    """Return (maps (n, H, W) float32, labels (n, 4) float64, manifest)."""
    dataset_dir = Path(dataset_dir)
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    maps, labels = [], []
    for record in manifest["records"]:
        maps.append(read_tlsm(dataset_dir / record["file"]))
        labels.append(record["q"])
    return np.stack(maps), np.asarray(labels, dtype=float), manifest


def split_indices(n: int, sizes: dict = SPLIT_SIZES) -> dict[str, np.ndarray]:
    """Contiguous train/val/test index blocks (manifest order is already
    an i.i.d. draw, so no shuffle is needed)."""
    need = sum(sizes.values())
    if n < need:
        raise ValueError(f"dataset holds {n} samples, split needs {need}")
    out, start = {}, 0
    for name in ("train", "val", "test"):
        out[name] = np.arange(start, start + sizes[name])
        start += sizes[name]
    return out


def normalize(Q: np.ndarray, bounds=None):
    """Column-wise affine map onto [1, 10]; returns (normalized, bounds)."""
    Q = np.asarray(Q, dtype=float)
    if bounds is None:
        q_min, q_max = Q.min(axis=0), Q.max(axis=0)
    else:
        q_min, q_max = (np.asarray(b, dtype=float) for b in bounds)
    span = q_max - q_min
    if np.any(span <= 0):
        raise ValueError("degenerate label column")
    return NORM_LO + (NORM_HI - NORM_LO) * (Q - q_min) / span, (q_min, q_max)


def denormalize(Q_norm: np.ndarray, bounds) -> np.ndarray:
    q_min, q_max = (np.asarray(b, dtype=float) for b in bounds)
    return q_min + (np.asarray(Q_norm, float) - NORM_LO) * (q_max - q_min) / (
        NORM_HI - NORM_LO
    )
