"""Time evolution of the master equation with interchangeable engines.

Two engines satisfy the same contract and are cross-checked in the test
suite:

  - "rk45": adaptive embedded Dormand-Prince 5(4) on the density matrix,
    with an optional fixed-step mode for convergence-order checks;
  - "expm": exact exponential stepping of the time-independent
    Liouvillian (scipy.linalg.expm), preferred for bulk generation.

Snapshots are hit exactly in both engines.  Explicit Runge-Kutta steps
preserve the trace to round-off (the right-hand side is traceless for
any argument) and Hermiticity likewise, so no renormalization is applied;
the invariants are *checked*, not enforced.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from ..errors import InvariantViolation, ToleranceNotAchieved
from .lindblad import collapse_channels, liouvillian
from .params import SystemParams

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = -1e-8

# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_MIN_STEP_FRACTION = 1e-14


def validate_density_matrix(rho: np.ndarray, context: str = "") -> None:
    """Raise InvariantViolation unless rho is a valid density matrix.

    Thresholds: Hermiticity defect <= 1e-10 (max abs entry), trace within
    1e-8 of one, minimum eigenvalue >= -1e-8.
    """
    herm_defect = np.abs(rho - rho.conj().T).max()
    if herm_defect > HERMITICITY_TOL:
        raise InvariantViolation(
            f"Hermiticity defect {herm_defect:.3e} > {HERMITICITY_TOL:.0e} {context}"
        )
    trace_defect = abs(rho.trace() - 1.0)
    if trace_defect > TRACE_TOL:
        raise InvariantViolation(
            f"trace defect {trace_defect:.3e} > {TRACE_TOL:.0e} {context}"
        )
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if min_eig < POSITIVITY_TOL:
        raise InvariantViolation(
            f"min eigenvalue {min_eig:.3e} < {POSITIVITY_TOL:.0e} {context}"
        )


def _make_rhs(H, params: SystemParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Compiled right-hand side; folds the anticommutator parts of the
    dissipators into an effective non-Hermitian drift for fewer matmuls."""
    channels = [(rate, c) for rate, c in collapse_channels(params) if rate > 0]
    jump_parts = [(rate, c, c.conj().T) for rate, c in channels]
    dim = channels[0][1].shape[0] if channels else 6
    half_cdc = np.zeros((dim, dim), dtype=complex)
    for rate, c in channels:
        half_cdc += 0.5 * rate * (c.conj().T @ c)

    if callable(H):
        def rhs(t, rho):
            K = -1j * H(t) - half_cdc
            drho = K @ rho + rho @ K.conj().T
            for rate, c, c_dag in jump_parts:
                drho += rate * (c @ rho @ c_dag)
            return drho
    else:
        K_static = -1j * H - half_cdc
        K_static_dag = K_static.conj().T

        def rhs(t, rho):
            drho = K_static @ rho + rho @ K_static_dag
            for rate, c, c_dag in jump_parts:
                drho += rate * (c @ rho @ c_dag)
            return drho

    return rhs


def _dp_step(rhs, t, y, h):
    """One Dormand-Prince step; returns (y5, scaled error estimate source)."""
    k = [rhs(t, y)]
    for i in range(1, 7):
        yi = y + h * sum(aij * kj for aij, kj in zip(_DP_A[i], k))
        k.append(rhs(t + _DP_C[i] * h, yi))
    y5 = y + h * sum(b * kj for b, kj in zip(_DP_B5, k))
    y4 = y + h * sum(b * kj for b, kj in zip(_DP_B4, k))
    return y5, y5 - y4


def _integrate_rk45(rhs, y0, t0, t1, rtol, atol):
    """Adaptive integration from t0 to t1; returns y(t1)."""
    if t1 == t0:
        return y0.copy()
    t, y = t0, y0.copy()
    span = t1 - t0
    h = min(span, max(span * 1e-3, 1e-3))
    while t < t1:
        h = min(h, t1 - t)
        if h < _MIN_STEP_FRACTION * max(1.0, abs(t)):
            raise ToleranceNotAchieved(
                f"step size underflow at t={t:.6g} ns (h={h:.3e})"
            )
        y_new, err_vec = _dp_step(rhs, t, y, h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))
        if err <= 1.0:
            t = t + h
            y = y_new
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            h = h * factor
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
    return y


def _integrate_fixed(rhs, y0, t0, t1, step):
    """Fixed-step Dormand-Prince (propagates the 5th-order solution)."""
    t, y = t0, y0.copy()
    while t < t1 - 1e-12 * max(1.0, abs(t1)):
        h = min(step, t1 - t)
        y, _ = _dp_step(rhs, t, y, h)
        t += h
    return y


def _check_snapshots(snapshots: Sequence[float]) -> np.ndarray:
    times = np.asarray(snapshots, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("snapshots must be a non-empty 1-D sequence")
    if times[0] < 0:
        raise ValueError("snapshot times must be non-negative")
    if np.any(np.diff(times) < 0):
        raise ValueError("snapshot times must be sorted ascending")
    return times


def evolve(
    rho0: np.ndarray,
    H,
    params: SystemParams,
    snapshots: Sequence[float],
    method: str = "rk45",
    rtol: float = 1e-8,
    atol: float = 1e-10,
    fixed_step: float | None = None,
    validate: bool = True,
) -> list[np.ndarray]:
    """Density matrices at each snapshot time (ns).

    `H` is a 6x6 matrix in rad/ns, or a callable t -> matrix for
    time-dependent Hamiltonians (rk45 only).  Snapshot times must be
    non-negative and ascending; t=0 returns rho0 as-is (validated).
    """
    times = _check_snapshots(snapshots)
    if method not in ("rk45", "expm"):
        raise ValueError(f"unknown method {method!r}")
    if method == "expm" and callable(H):
        raise ValueError("expm engine requires a time-independent Hamiltonian")

    out: list[np.ndarray] = []
    if method == "expm":
        L = liouvillian(H, params)
        propagators: dict[float, np.ndarray] = {}
        vec = rho0.astype(complex).reshape(-1)
        t_prev = 0.0
        for t in times:
            dt = t - t_prev
            if dt > 0:
                if dt not in propagators:
                    propagators[dt] = expm(L * dt)
                vec = propagators[dt] @ vec
            t_prev = t
            rho = vec.reshape(rho0.shape)
            if validate:
                validate_density_matrix(rho, context=f"at t={t:g} ns")
            out.append(rho.copy())
        return out

    rhs = _make_rhs(H, params)
    rho = rho0.astype(complex).copy()
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            if fixed_step is not None:
                rho = _integrate_fixed(rhs, rho, t_prev, t, fixed_step)
            else:
                rho = _integrate_rk45(rhs, rho, t_prev, t, rtol, atol)
        t_prev = t
        if validate:
            validate_density_matrix(rho, context=f"at t={t:g} ns")
        out.append(rho.copy())
    return out
