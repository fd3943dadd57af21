"""Lindblad master equation right-hand side and its superoperator form.

Four incoherent channels act alongside the coherent commutator:

  - qubit dissipation, jump operator a, rate gamma_q = 1/T1_q
  - qubit pure dephasing, jump operator a+a, rate kappa_q = 1/Tphi_q
  - TLS dissipation, jump operator b, rate gamma_tls
  - TLS pure dephasing, jump operator b+b, rate kappa_tls

The dephasing channels use the number operators themselves (not sigma_z),
so dephasing of the qubit's second level is four times that of the first.
All rates are in 1/ns; H is in rad/ns.
"""

from __future__ import annotations

import numpy as np

from .operators import build_operators
from .params import SystemParams


def collapse_channels(params: SystemParams) -> list[tuple[float, np.ndarray]]:
    """(rate, jump operator) pairs for the four incoherent channels."""
    a, a_dag, b, b_dag = build_operators()
    return [
        (params.gamma_q, a),
        (params.kappa_q, a_dag @ a),
        (params.gamma_tls, b),
        (params.kappa_tls, b_dag @ b),
    ]


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, params: SystemParams) -> np.ndarray:
    """d(rho)/dt for the master equation, as a 6x6 complex matrix.

    Each channel contributes rate * (c rho c+ - (c+c rho + rho c+c)/2);
    the result is traceless and Hermiticity-preserving by construction.
    """
    drho = -1j * (H @ rho - rho @ H)
    for rate, c in collapse_channels(params):
        c_dag = c.conj().T
        cdc = c_dag @ c
        drho += rate * (c @ rho @ c_dag - 0.5 * (cdc @ rho + rho @ cdc))
    return drho


def liouvillian(H: np.ndarray, params: SystemParams) -> np.ndarray:
    """Matrix of the generator acting on row-major vectorized rho.

    With vec(A X B) = (A kron B^T) vec(X) for row-major vec:

      L = -i (H kron I - I kron H^T)
          + sum_k rate_k [ c kron conj(c)
                           - (c+c kron I)/2 - (I kron (c+c)^T)/2 ]

    so that vec(d rho/dt) = L vec(rho).  Used for exact exponential
    propagation of the time-independent equation.
    """
    dim = H.shape[0]
    eye = np.eye(dim, dtype=complex)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for rate, c in collapse_channels(params):
        cdc = c.conj().T @ c
        L += rate * (
            np.kron(c, c.conj())
            - 0.5 * np.kron(cdc, eye)
            - 0.5 * np.kron(eye, cdc.T)
        )
    return L
