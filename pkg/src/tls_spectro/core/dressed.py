"""Dressed frequencies of the coupled qubit-TLS single-excitation doublet."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import SystemParams


@dataclass(frozen=True)
class DressedFrequencies:
    """Single-excitation eigenfrequencies in GHz.

    detuning_dressed is exactly nu_tls_dressed - nu_q_dressed.
    """

    nu_q_dressed: float
    nu_tls_dressed: float
    detuning_dressed: float


def dressed_frequencies(params: SystemParams) -> DressedFrequencies:
    """Diagonalize the 2x2 single-excitation block [[nu_q, g], [g, nu_tls]].

    Eigenvalues are (nu_q + nu_tls)/2 +- sqrt(Delta^2/4 + g^2) with
    Delta = nu_tls - nu_q.  The eigenvalue whose eigenvector has the larger
    overlap with |10> is assigned to the qubit: the lower one for Delta > 0,
    the upper one for Delta < 0.  At Delta = 0 the overlaps tie and the
    qubit takes the lower eigenvalue by convention.
    """
    delta = params.nu_tls - params.nu_q
    mean = 0.5 * (params.nu_q + params.nu_tls)
    split = math.sqrt(0.25 * delta * delta + params.g * params.g)
    lower, upper = mean - split, mean + split

    if delta >= 0:
        nu_q_dressed, nu_tls_dressed = lower, upper
    else:
        nu_q_dressed, nu_tls_dressed = upper, lower

    return DressedFrequencies(
        nu_q_dressed=nu_q_dressed,
        nu_tls_dressed=nu_tls_dressed,
        detuning_dressed=nu_tls_dressed - nu_q_dressed,
    )
