"""Randomized sample generation, binary map serialization, manifests.

Each sample is one spectroscopy map plus its label.  Maps are stored in
a minimal binary format (.tlsm) so that any language can parse them:

    bytes 0-3   magic "TLSM"
    bytes 4-7   u32 little-endian number of rows (time axis length)
    bytes 8-11  u32 little-endian number of columns (frequency axis length)
    then rows*cols float32 little-endian, row-major

Axes and labels live in manifest.json next to the samples directory.
Per-sample randomness is derived from (global seed, sample index) so any
subset can be regenerated independently and bit-identically, regardless
of worker count.
"""

from __future__ import annotations

import json
import logging
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .core import SystemParams
from .errors import FormatError, InvariantViolation, ToleranceNotAchieved
from .spectroscopy import ProtocolConfig, SpectroscopyMap, add_noise, run_protocol

log = logging.getLogger(__name__)

MAGIC = b"TLSM"
FORMAT_VERSION = 1

NU_Q_FIXED = 7.0  # GHz; only the detuning matters physically

# Uniform sampling ranges (GHz, ns).
PARAM_RANGES = {
    "nu_tls": (6.75, 7.25),
    "U": (0.150, 0.300),
    "g": (0.005, 0.050),
    "T1_q": (1_000.0, 10_000.0),
    "Tphi_q": (500.0, 5_000.0),
    "T1_tls": (500.0, 10_000.0),
    "Tphi_tls": (500.0, 20_000.0),
}

NOISE_WIDTH_RANGE = (0.01, 0.2)

_MAX_ATTEMPTS = 5

# Sub-stream tags so parameter draws and noise draws never alias.
_PARAMS_STREAM = 0
_NOISE_STREAM = 1


def sample_params(rng: np.random.Generator, A: float = 0.02) -> SystemParams:
    """Draw one parameter set; nu_q is pinned at 7 GHz.

    Draw order is fixed (nu_tls, U, g, T1_q, Tphi_q, T1_tls, Tphi_tls) so
    a seeded generator reproduces the same sequence forever.
    """
    draws = {name: rng.uniform(*PARAM_RANGES[name]) for name in PARAM_RANGES}
    return SystemParams(nu_q=NU_Q_FIXED, A=A, **draws)


@dataclass
class SampleLabel:
    """Targets q = [nu_tls, g, T1_tls, Tphi_tls] plus nuisance parameters."""

    q: list[float]
    nuisance: list[float]  # [U, T1_q, Tphi_q, A]
    noise_width: float
    seed: int

    @classmethod
    def from_params(cls, params: SystemParams, noise_width: float, seed: int):
        return cls(
            q=[params.nu_tls, params.g, params.T1_tls, params.Tphi_tls],
            nuisance=[params.U, params.T1_q, params.Tphi_q, params.A],
            noise_width=noise_width,
            seed=int(seed),
        )

    def to_params(self, nu_q: float = NU_Q_FIXED) -> SystemParams:
        nu_tls, g, T1_tls, Tphi_tls = self.q
        U, T1_q, Tphi_q, A = self.nuisance
        return SystemParams(
            nu_q=nu_q,
            nu_tls=nu_tls,
            U=U,
            g=g,
            T1_q=T1_q,
            Tphi_q=Tphi_q,
            T1_tls=T1_tls,
            Tphi_tls=Tphi_tls,
            A=A,
        )


@dataclass
class DatasetManifest:
    format_version: int
    count: int
    noise_mode: str
    global_seed: int
    nu_q: float
    amplitude: float
    omega_grid: tuple[float, float, int]
    time_grid: tuple[float, float, int]
    parameter_ranges: dict
    engine: str
    records: list[dict] = field(default_factory=list)

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            omega_grid=tuple(self.omega_grid),
            time_grid=tuple(self.time_grid),
            A=self.amplitude,
        )

    def labels(self) -> list[SampleLabel]:
        return [
            SampleLabel(
                q=list(r["q"]),
                nuisance=list(r["nuisance"]),
                noise_width=r["noise_width"],
                seed=r["seed"],
            )
            for r in self.records
        ]

    def save(self, path: Path) -> None:
        payload = asdict(self)
        path.write_text(json.dumps(payload, indent=1))

    @classmethod
    def load(cls, path: Path) -> "DatasetManifest":
        data = json.loads(Path(path).read_text())
        data["omega_grid"] = tuple(data["omega_grid"])
        data["time_grid"] = tuple(data["time_grid"])
        return cls(**data)


def write_tlsm(path: Path, P: np.ndarray) -> None:
    """Serialize one map matrix to the TLSM binary format."""
    rows, cols = P.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(np.ascontiguousarray(P, dtype="<f4").tobytes())


def read_tlsm(path: Path) -> np.ndarray:
    """Parse one TLSM file back into a float32 (rows, cols) matrix."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header")
    rows, cols = struct.unpack("<II", raw[4:12])
    expected = 12 + 4 * rows * cols
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload is {len(raw)} bytes, expected {expected} "
            f"for {rows}x{cols}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=12)
    return data.reshape(rows, cols).copy()


def sample_file_name(index: int) -> str:
    return f"sample_{index:05d}.tlsm"


def _sample_seed(global_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([global_seed, index]).generate_state(1, np.uint64)[0])


def compute_sample(
    global_seed: int,
    index: int,
    config: ProtocolConfig,
    noise_mode: str,
    engine: str = "expm",
) -> tuple[SampleLabel, np.ndarray]:
    """Deterministically build sample `index` of the dataset.

    Parameter draws come from the stream (seed, index, 0, attempt) and
    noise from (seed, index, 1); deriving both from (seed, index) is what
    makes subsets reproducible and clean/noisy datasets share parameter
    draws.  A failed integration is logged and retried with a fresh
    parameter draw (next attempt).
    """
    if noise_mode not in ("clean", "noisy"):
        raise ValueError(f"unknown noise mode {noise_mode!r}")

    spec_map = None
    params = None
    for attempt in range(_MAX_ATTEMPTS):
        rng = np.random.default_rng([global_seed, index, _PARAMS_STREAM, attempt])
        params = sample_params(rng, A=config.A)
        try:
            spec_map = run_protocol(params, config, engine=engine)
            break
        except (InvariantViolation, ToleranceNotAchieved) as exc:
            log.warning(
                "sample %d attempt %d failed integration (%s); resampling",
                index,
                attempt,
                exc,
            )
    else:
        raise InvariantViolation(
            f"sample {index}: integration failed {_MAX_ATTEMPTS} times"
        )

    noise_width = 0.0
    if noise_mode == "noisy":
        noise_rng = np.random.default_rng([global_seed, index, _NOISE_STREAM])
        noise_width = float(noise_rng.uniform(*NOISE_WIDTH_RANGE))
        spec_map = add_noise(spec_map, noise_width, noise_rng)

    label = SampleLabel.from_params(
        params, noise_width, seed=_sample_seed(global_seed, index)
    )
    return label, spec_map.P


def _compute_sample_star(args):
    return args[1], compute_sample(*args[0])


def generate_dataset(
    n: int,
    config: ProtocolConfig,
    noise_mode: str,
    seed: int,
    out_dir: Path,
    parallelism: int = 1,
    engine: str = "expm",
    export_pngs: bool = False,
) -> DatasetManifest:
    """Generate n samples into out_dir and write the manifest last.

    The manifest acts as the completion marker: a directory without one
    holds partial output.  Worker count never changes the bytes produced.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    out_dir = Path(out_dir)
    samples_dir = out_dir / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)
    if export_pngs:
        (out_dir / "png").mkdir(exist_ok=True)

    manifest = DatasetManifest(
        format_version=FORMAT_VERSION,
        count=n,
        noise_mode=noise_mode,
        global_seed=seed,
        nu_q=NU_Q_FIXED,
        amplitude=config.A,
        omega_grid=config.omega_grid,
        time_grid=config.time_grid,
        parameter_ranges={k: list(v) for k, v in PARAM_RANGES.items()},
        engine=engine,
        records=[None] * n,
    )

    tasks = [((seed, i, config, noise_mode, engine), i) for i in range(n)]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = pool.map(_compute_sample_star, tasks, chunksize=4)
            for index, (label, P) in results:
                _store_sample(out_dir, manifest, index, label, P, export_pngs)
    else:
        for task in tasks:
            index, (label, P) = _compute_sample_star(task)
            _store_sample(out_dir, manifest, index, label, P, export_pngs)

    manifest.save(out_dir / "manifest.json")
    return manifest


def _store_sample(out_dir, manifest, index, label, P, export_pngs):
    name = sample_file_name(index)
    write_tlsm(out_dir / "samples" / name, P)
    if export_pngs:
        spec_map = SpectroscopyMap(
            omega_axis=manifest.protocol_config().omega_axis,
            time_axis=manifest.protocol_config().time_axis,
            P=P,
        )
        export_png(spec_map, out_dir / "png" / name.replace(".tlsm", ".png"))
    manifest.records[index] = {"file": f"samples/{name}", **asdict(label)}


def load_sample(
    dataset_dir: Path, manifest: DatasetManifest, index: int
) -> tuple[SampleLabel, SpectroscopyMap]:
    """Read one stored sample back as (label, map with axes)."""
    record = manifest.records[index]
    P = read_tlsm(Path(dataset_dir) / record["file"])
    config = manifest.protocol_config()
    spec_map = SpectroscopyMap(
        omega_axis=config.omega_axis, time_axis=config.time_axis, P=P.astype(float)
    )
    label = SampleLabel(
        q=list(record["q"]),
        nuisance=list(record["nuisance"]),
        noise_width=record["noise_width"],
        seed=record["seed"],
    )
    return label, spec_map


def export_png(spec_map: SpectroscopyMap, path: Path) -> None:
    """8-bit grayscale PNG; [min, max] maps linearly onto [0, 255].

    Row 0 is the smallest t_A, column 0 the smallest drive frequency.
    A constant map degenerates to all-zero pixels.
    """
    P = spec_map.P
    span = P.max() - P.min()
    if span == 0:
        pixels = np.zeros(P.shape, dtype=np.uint8)
    else:
        scaled = (P - P.min()) / span * 255.0
        pixels = np.rint(scaled).astype(np.uint8)
    Image.fromarray(pixels, mode="L").save(Path(path), format="PNG")
