"""Physical parameters of one qubit + TLS instance.

Unit convention used across the package: ordinary frequencies in GHz
(values quoted as omega/2pi), times in ns.  The factor 2*pi to angular
rad/ns is applied only inside the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SystemParams:
    """All physical parameters of a single qubit coupled to a single TLS.

    Attributes
    ----------
    nu_q : float
        Qubit frequency in GHz.
    nu_tls : float
        TLS frequency in GHz.
    U : float
        Qubit anharmonicity in GHz.
    g : float
        Qubit-TLS coupling in GHz.
    T1_q, Tphi_q : float
        Qubit dissipation and pure-dephasing times in ns.
    T1_tls, Tphi_tls : float
        TLS dissipation and pure-dephasing times in ns.
    A : float
        Drive amplitude in GHz (resonant 0-1 Rabi frequency).
    """

    nu_q: float
    nu_tls: float
    U: float
    g: float
    T1_q: float
    Tphi_q: float
    T1_tls: float
    Tphi_tls: float
    A: float = 0.02

    def __post_init__(self):
        for name in ("nu_q", "nu_tls", "U"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("T1_q", "Tphi_q", "T1_tls", "Tphi_tls"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite")
        # g and A may be zero in diagnostic configurations (undriven or
        # uncoupled evolution), but never negative.
        for name in ("g", "A"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    # Decoherence rates in 1/ns: gamma = 1/T1, kappa = 1/Tphi.
    @property
    def gamma_q(self) -> float:
        return 1.0 / self.T1_q

    @property
    def kappa_q(self) -> float:
        return 1.0 / self.Tphi_q

    @property
    def gamma_tls(self) -> float:
        return 1.0 / self.T1_tls

    @property
    def kappa_tls(self) -> float:
        return 1.0 / self.Tphi_tls

    @property
    def detuning(self) -> float:
        """Bare detuning nu_tls - nu_q in GHz."""
        return self.nu_tls - self.nu_q
