"""Analytical extraction of TLS frequency and coupling from one map.

Pipeline: collapse the map into a per-frequency contrast profile, locate
the dressed qubit and TLS lines near the label hints, fit the damped
cosine p(t) = c1 + c2 exp(-c3 t) cos(c4 t + c5) to the vertical slice at
the dressed TLS frequency, then recover

    g_hat      = Omega * detuning_dressed / A      (Omega = c4 / 2pi)
    nu_tls_hat = nu_tls_dressed + g_hat^2 / detuning_dressed

All frequencies are ordinary GHz; the ratios make the 2pi factors cancel.
The procedure is perturbative (g << detuning) and is expected to degrade
as the detuning shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyWindow, PeaksCollide, SingularJacobian
from .spectroscopy import ProtocolConfig, SpectroscopyMap

TWO_PI = 2.0 * math.pi

MAX_ITERATIONS = 200
COST_DECREASE_TOL = 1e-10
GRADIENT_TOL = 1e-12
MIN_AMPLITUDE = 1e-3
VALIDITY_HALF_WIDTH = 0.2  # GHz around the qubit frequency

# +-0.03 GHz covers the largest dispersive shifts in the estimator's
# validity regime (g^2/|detuning| < 8 MHz) plus grid snap, while keeping
# the two-photon |20> line (at nu_q - U/2) out of the TLS window for TLS
# frequencies below the qubit.
DEFAULT_PEAK_WINDOW = 0.03  # GHz around each hint

# Protocol settings for estimation runs.  The cross-resonance response
# at the dressed TLS frequency has width ~ g*A/detuning (sub-MHz to a
# few MHz), so the drive grid must be fine enough to land on it and the
# drive weak enough that the power-broadened qubit line does not bury
# it; the time window must hold at least a fair fraction of the slowest
# Rabi period.  These values were tuned against labeled simulations.
ESTIMATION_CONFIG = ProtocolConfig(
    omega_grid=(6.7, 7.3, 1201),
    time_grid=(0.0, 2000.0, 200),
    A=0.005,
)


@dataclass
class FitResult:
    """Damped-cosine fit c1 + c2 exp(-c3 t) cos(c4 t + c5).

    c3 in 1/ns, c4 in rad/ns (kept non-negative; sign ambiguity folded
    into the phase, which lives in [0, 2pi)).
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    residual_rms: float
    converged: bool
    iterations: int

    @property
    def rabi_frequency(self) -> float:
        """Fitted oscillation frequency as an ordinary frequency in GHz."""
        return self.c4 / TWO_PI


@dataclass
class EstimateResult:
    nu_tls_hat: float | None
    g_hat: float | None
    nu_q_dressed_obs: float | None
    nu_tls_dressed_obs: float | None
    detuning_dressed_obs: float | None
    fit: FitResult | None
    valid: bool
    reject_reason: str | None = None


def contrast_profile(spec_map: SpectroscopyMap) -> np.ndarray:
    """Per-frequency contrast: max over t_A minus mean over t_A."""
    if spec_map.P.shape[0] < 2:
        raise ValueError("contrast profile needs at least two time rows")
    return spec_map.P.max(axis=0) - spec_map.P.mean(axis=0)


def validity_filter(nu_tls: float, nu_q: float) -> bool:
    """True iff the TLS lies within +-0.2 GHz of the qubit frequency.

    The boundary is inclusive; a round-off allowance keeps exact
    boundary values (e.g. detuning written as 0.2) on the inside.
    """
    return abs(nu_tls - nu_q) <= VALIDITY_HALF_WIDTH + 1e-9


def pick_peaks(
    profile: np.ndarray,
    omega_axis: np.ndarray,
    nu_q_hint: float,
    nu_tls_hint: float,
    window: float = DEFAULT_PEAK_WINDOW,
) -> tuple[float, float]:
    """Contrast maxima within +-window of each hint, in GHz.

    Raises EmptyWindow when a window holds no grid points and PeaksCollide
    when both searches land on the same grid point (unresolvable
    near-resonance).
    """
    picks = []
    for hint in (nu_q_hint, nu_tls_hint):
        mask = np.abs(omega_axis - hint) <= window
        if not mask.any():
            raise EmptyWindow(
                f"no grid points within {window} GHz of {hint} GHz"
            )
        candidates = np.flatnonzero(mask)
        picks.append(candidates[np.argmax(profile[candidates])])
    if picks[0] == picks[1]:
        raise PeaksCollide(
            f"qubit and TLS windows both selected {omega_axis[picks[0]]:.6g} GHz"
        )
    return float(omega_axis[picks[0]]), float(omega_axis[picks[1]])


def _damped_cosine(t: np.ndarray, c: np.ndarray) -> np.ndarray:
    return c[0] + c[1] * np.exp(-c[2] * t) * np.cos(c[3] * t + c[4])


def _jacobian(t: np.ndarray, c: np.ndarray) -> np.ndarray:
    envelope = np.exp(-c[2] * t)
    phase = c[3] * t + c[4]
    cos_p, sin_p = np.cos(phase), np.sin(phase)
    J = np.empty((t.size, 5))
    J[:, 0] = 1.0
    J[:, 1] = envelope * cos_p
    J[:, 2] = -t * c[1] * envelope * cos_p
    J[:, 3] = -t * c[1] * envelope * sin_p
    J[:, 4] = -c[1] * envelope * sin_p
    return J


def _initial_guess(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    c1 = values.mean()
    c2 = 0.5 * (values.max() - values.min())
    c3 = 1.0 / times[-1]
    # Dominant nonzero DFT bin of the demeaned signal sets the frequency.
    dt = (times[-1] - times[0]) / (times.size - 1)
    spectrum = np.abs(np.fft.rfft(values - values.mean()))
    k_star = 1 + int(np.argmax(spectrum[1:])) if spectrum.size > 1 else 1
    c4 = TWO_PI * k_star / (times.size * dt)
    return np.array([c1, c2, c3, c4, 0.0])


def fit_damped_cosine(times, values) -> FitResult:
    """Levenberg-Marquardt fit of the damped cosine model.

    Convergence: relative cost decrease below 1e-10 on an accepted step,
    or gradient norm below 1e-12, within 200 iterations.  Running out of
    iterations returns converged=False rather than raising; a Jacobian
    that stays singular under damping raises SingularJacobian.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 10:
        raise ValueError("need at least 10 samples to fit")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")

    c = _initial_guess(times, values)
    residual = _damped_cosine(times, c) - values
    cost = float(residual @ residual)

    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        J = _jacobian(times, c)
        gradient = J.T @ residual
        if np.linalg.norm(gradient) < GRADIENT_TOL:
            converged = True
            break
        JtJ = J.T @ J
        damping = np.diag(JtJ).copy()
        floor = max(damping.max(), 1.0) * 1e-14
        damping[damping < floor] = floor

        accepted = False
        while lam <= 1e12:
            try:
                step = np.linalg.solve(JtJ + lam * np.diag(damping), -gradient)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            if not np.all(np.isfinite(step)):
                raise SingularJacobian("non-finite Levenberg-Marquardt step")
            trial = c + step
            trial[2] = max(trial[2], 0.0)  # decay rate stays physical
            trial_residual = _damped_cosine(times, trial) - values
            trial_cost = float(trial_residual @ trial_residual)
            if np.isfinite(trial_cost) and trial_cost < cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # no descent direction even under heavy damping: stalled
            break

        relative_decrease = (cost - trial_cost) / max(cost, 1e-300)
        c, residual, cost = trial, trial_residual, trial_cost
        lam = max(lam / 3.0, 1e-14)
        if relative_decrease < COST_DECREASE_TOL:
            converged = True
            break

    c1, c2, c3, c4, c5 = c
    if c2 < 0:
        c2, c5 = -c2, c5 + math.pi
    if c4 < 0:
        c4, c5 = -c4, -c5
    c5 = c5 % TWO_PI

    return FitResult(
        c1=float(c1),
        c2=float(c2),
        c3=float(c3),
        c4=float(c4),
        c5=float(c5),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        converged=converged,
        iterations=iterations,
    )


def estimate(
    spec_map: SpectroscopyMap,
    label_hints: tuple[float, float],
    A: float,
    window: float = DEFAULT_PEAK_WINDOW,
) -> EstimateResult:
    """Run the full analytical pipeline on one map.

    label_hints is (nu_q, nu_tls) from the sample label; A is the drive
    amplitude in GHz.  Failures surface as valid=False with a reject
    reason rather than exceptions.
    """
    if A <= 0:
        raise ValueError("drive amplitude must be positive")
    nu_q_hint, nu_tls_hint = label_hints

    invalid = EstimateResult(
        nu_tls_hat=None,
        g_hat=None,
        nu_q_dressed_obs=None,
        nu_tls_dressed_obs=None,
        detuning_dressed_obs=None,
        fit=None,
        valid=False,
    )

    if not validity_filter(nu_tls_hint, nu_q_hint):
        invalid.reject_reason = "OutOfRange"
        return invalid

    profile = contrast_profile(spec_map)
    try:
        nu_q_obs, nu_tls_obs = pick_peaks(
            profile, spec_map.omega_axis, nu_q_hint, nu_tls_hint, window
        )
    except PeaksCollide:
        invalid.reject_reason = "PeaksCollide"
        return invalid
    except EmptyWindow:
        invalid.reject_reason = "EmptyWindow"
        return invalid

    detuning_obs = nu_tls_obs - nu_q_obs
    column = int(np.argmin(np.abs(spec_map.omega_axis - nu_tls_obs)))

    invalid.nu_q_dressed_obs = nu_q_obs
    invalid.nu_tls_dressed_obs = nu_tls_obs
    invalid.detuning_dressed_obs = detuning_obs

    try:
        fit = fit_damped_cosine(spec_map.time_axis, spec_map.P[:, column])
    except SingularJacobian:
        invalid.reject_reason = "SingularJacobian"
        return invalid

    invalid.fit = fit
    if not fit.converged:
        invalid.reject_reason = "FitNotConverged"
        return invalid
    if fit.c2 < MIN_AMPLITUDE:
        invalid.reject_reason = "NearZeroAmplitude"
        return invalid

    omega = fit.rabi_frequency
    g_signed = omega * detuning_obs / A
    nu_tls_hat = nu_tls_obs + g_signed**2 / detuning_obs

    return EstimateResult(
        nu_tls_hat=nu_tls_hat,
        g_hat=abs(g_signed),
        nu_q_dressed_obs=nu_q_obs,
        nu_tls_dressed_obs=nu_tls_obs,
        detuning_dressed_obs=detuning_obs,
        fit=fit,
        valid=True,
    )
