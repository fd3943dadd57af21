"""Transmon-TLS two-tone spectroscopy: simulation, datasets, estimation."""

from .core import (
    DressedFrequencies,
    SystemParams,
    build_hamiltonian,
    build_operators,
    dressed_frequencies,
    evolve,
    lindblad_rhs,
)
from .dataset import (
    DatasetManifest,
    SampleLabel,
    generate_dataset,
    read_tlsm,
    sample_params,
    write_tlsm,
)
from .estimator import (
    EstimateResult,
    FitResult,
    contrast_profile,
    estimate,
    fit_damped_cosine,
    pick_peaks,
    validity_filter,
)
from .evaluation import (
    PredictionTable,
    denormalize_labels,
    error_vs_detuning,
    mse,
    normalize_labels,
    scatter_export,
)
from .spectroscopy import (
    ProtocolConfig,
    SpectroscopyMap,
    add_noise,
    pi_pulse_duration,
    run_protocol,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetManifest",
    "DressedFrequencies",
    "EstimateResult",
    "FitResult",
    "PredictionTable",
    "ProtocolConfig",
    "SampleLabel",
    "SpectroscopyMap",
    "SystemParams",
    "add_noise",
    "build_hamiltonian",
    "build_operators",
    "contrast_profile",
    "denormalize_labels",
    "dressed_frequencies",
    "error_vs_detuning",
    "estimate",
    "evolve",
    "fit_damped_cosine",
    "generate_dataset",
    "lindblad_rhs",
    "mse",
    "normalize_labels",
    "pi_pulse_duration",
    "pick_peaks",
    "read_tlsm",
    "run_protocol",
    "sample_params",
    "scatter_export",
    "validity_filter",
    "write_tlsm",
]
