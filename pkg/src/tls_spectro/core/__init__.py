"""Truncated-Hilbert-space operators, Hamiltonian, Lindblad evolution."""

from .dressed import DressedFrequencies, dressed_frequencies
from .evolve import evolve, validate_density_matrix
from .hamiltonian import build_hamiltonian, build_lab_hamiltonian
from .lindblad import collapse_channels, lindblad_rhs, liouvillian
from .operators import (
    DIM,
    basis_index,
    basis_state,
    build_operators,
    expectation,
    projector,
    qubit_population,
    tls_population,
)
from .params import SystemParams

__all__ = [
    "DIM",
    "DressedFrequencies",
    "SystemParams",
    "basis_index",
    "basis_state",
    "build_hamiltonian",
    "build_lab_hamiltonian",
    "build_operators",
    "collapse_channels",
    "dressed_frequencies",
    "evolve",
    "expectation",
    "lindblad_rhs",
    "liouvillian",
    "projector",
    "qubit_population",
    "tls_population",
    "validate_density_matrix",
]
