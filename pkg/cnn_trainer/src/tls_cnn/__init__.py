"""CNN regressor for TLS parameters from two-tone spectroscopy maps."""

from .data import denormalize, load_dataset, normalize, read_tlsm, split_indices
from .experiments import EXPERIMENTS, ExperimentSpec, run_experiments
from .model import ModelSpec, SpectroscopyRegressor, build_model
from .train import load_checkpoint, predict, save_checkpoint, train

__all__ = [
    "EXPERIMENTS",
    "ExperimentSpec",
    "ModelSpec",
    "SpectroscopyRegressor",
    "build_model",
    "denormalize",
    "load_checkpoint",
    "load_dataset",
    "normalize",
    "predict",
    "read_tlsm",
    "run_experiments",
    "save_checkpoint",
    "split_indices",
    "train",
]
