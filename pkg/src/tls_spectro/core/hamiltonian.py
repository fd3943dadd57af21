"""Rotating-frame Hamiltonian of the driven qubit + TLS system."""

from __future__ import annotations

import numpy as np

from .operators import build_operators
from .params import SystemParams

TWO_PI = 2.0 * np.pi


def build_hamiltonian(params: SystemParams, nu_d: float) -> np.ndarray:
    """Hamiltonian in the frame rotating at the drive frequency, in rad/ns.

    H = (w_q - w_d) a+a - (U/2) a+a+aa + (w_tls - w_d) b+b
        + g (a+b + b+a) + (A/2)(a + a+)

    All parameters enter as ordinary frequencies in GHz and are converted
    to angular rad/ns here (factor 2*pi).  The drive term is the
    rotating-wave form, which makes H time-independent; the resonant 0-1
    Rabi frequency equals A.
    """
    a, a_dag, b, b_dag = build_operators()
    n_q = a_dag @ a
    n_tls = b_dag @ b

    H = (params.nu_q - nu_d) * n_q
    H = H - 0.5 * params.U * (a_dag @ a_dag @ a @ a)
    H = H + (params.nu_tls - nu_d) * n_tls
    H = H + params.g * (a_dag @ b + b_dag @ a)
    H = H + 0.5 * params.A * (a + a_dag)
    return TWO_PI * H


def build_lab_hamiltonian(params: SystemParams, nu_d: float):
    """Callable t -> H(t) in the lab frame with an explicit cosine drive.

    H(t) = w_q a+a - (U/2) a+a+aa + w_tls b+b + g (a+b + b+a)
           + A cos(w_d t) (a + a+)

    Only used to check the rotating-wave approximation; the cosine drive
    with peak amplitude A reduces to (A/2)(a + a+) in the rotating frame.
    """
    a, a_dag, b, b_dag = build_operators()
    n_q = a_dag @ a
    n_tls = b_dag @ b

    H_static = TWO_PI * (
        params.nu_q * n_q
        - 0.5 * params.U * (a_dag @ a_dag @ a @ a)
        + params.nu_tls * n_tls
        + params.g * (a_dag @ b + b_dag @ a)
    )
    drive_op = TWO_PI * params.A * (a + a_dag)
    omega_d = TWO_PI * nu_d

    def hamiltonian_at(t: float) -> np.ndarray:
        return H_static + np.cos(omega_d * t) * drive_op

    return hamiltonian_at
