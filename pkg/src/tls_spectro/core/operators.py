"""Ladder operators on the truncated qubit (x) TLS product space.

The qubit is truncated at n_q = 2 (three levels) and the TLS is a strict
two-level system.  Basis ordering is fixed as index = 2*n_q + n_tls for
the product state |n_q n_tls>, i.e.

    0:|00>  1:|01>  2:|10>  3:|11>  4:|20>  5:|21>

numpy.kron(qubit_op, tls_op) realizes exactly this ordering.
"""

from __future__ import annotations

import numpy as np

DIM = 6
N_QUBIT_LEVELS = 3
N_TLS_LEVELS = 2


def build_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return (a, a_dag, b, b_dag) as 6x6 complex matrices.

    `a` annihilates qubit excitations with sqrt(n) amplitudes up to n = 2;
    `b` is the two-level lowering operator of the TLS.
    """
    a_q = np.zeros((N_QUBIT_LEVELS, N_QUBIT_LEVELS), dtype=complex)
    for n in range(1, N_QUBIT_LEVELS):
        a_q[n - 1, n] = np.sqrt(n)
    b_t = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)

    a = np.kron(a_q, np.eye(N_TLS_LEVELS, dtype=complex))
    b = np.kron(np.eye(N_QUBIT_LEVELS, dtype=complex), b_t)
    return a, a.conj().T, b, b.conj().T


def basis_index(n_q: int, n_tls: int) -> int:
    """Index of |n_q n_tls> in the fixed basis ordering."""
    if not (0 <= n_q < N_QUBIT_LEVELS and 0 <= n_tls < N_TLS_LEVELS):
        raise ValueError(f"state |{n_q}{n_tls}> outside the truncated space")
    return 2 * n_q + n_tls


def basis_state(n_q: int, n_tls: int) -> np.ndarray:
    """Ket |n_q n_tls> as a length-6 complex vector."""
    ket = np.zeros(DIM, dtype=complex)
    ket[basis_index(n_q, n_tls)] = 1.0
    return ket


def projector(n_q: int, n_tls: int) -> np.ndarray:
    """Density matrix |n_q n_tls><n_q n_tls|."""
    ket = basis_state(n_q, n_tls)
    return np.outer(ket, ket.conj())


def expectation(rho: np.ndarray, op: np.ndarray) -> float:
    """Real part of Tr(rho @ op)."""
    return float(np.trace(rho @ op).real)


def qubit_population(rho: np.ndarray) -> float:
    """<a^dag a> = Tr(rho a^dag a); diagonal in the number basis."""
    diag = rho.diagonal().real
    # n_q weights in basis order |00>,|01>,|10>,|11>,|20>,|21|
    return float(diag[2] + diag[3] + 2.0 * (diag[4] + diag[5]))


def tls_population(rho: np.ndarray) -> float:
    """<b^dag b>; diagonal in the number basis."""
    diag = rho.diagonal().real
    return float(diag[1] + diag[3] + diag[5])
