"""
Time-domain mean-field dynamics, used as a brute-force oracle.

The emitters are linear oscillators (<sigma_z> = -1), so both the driven
equations and the undriven effective system are 3-dimensional linear ODEs
with constant coefficients. They are integrated with classic fixed-step RK4;
for such systems one RK4 step is the fixed matrix polynomial returned by
:func:`rk4_propagator`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, build_effective_hamiltonian, on_manifold
from .errors import DomainError, NotConverged, StabilityError
from .response import DriveConfig

CONVERGENCE_RTOL = 1e-8


@dataclass(frozen=True)
class StateVector:
    a: complex
    sigma_1: complex
    sigma_2: complex

    @classmethod
    def from_array(cls, v) -> "StateVector":
        return cls(complex(v[0]), complex(v[1]), complex(v[2]))

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.sigma_1, self.sigma_2], dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))


@dataclass(frozen=True)
class DrivenResult:
    state: StateVector
    converged: bool
    drift: float


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # shape (n_samples, 3)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def rk4_propagator(M: np.ndarray, h: float):
    """One RK4 step for dV/dt = M V + f as ``V -> P V + Q f``."""
    n = M.shape[0]
    hM = h * M
    I = np.eye(n, dtype=complex)
    hM2 = hM @ hM
    hM3 = hM2 @ hM
    P = I + hM + hM2 / 2 + hM3 / 6 + hM3 @ hM / 24
    Q = h * (I + hM / 2 + hM2 / 6 + hM3 / 24)
    return P, Q


def rk4_step(rhs, v, t, h):
    k1 = rhs(t, v)
    k2 = rhs(t + h / 2, v + h / 2 * k1)
    k3 = rhs(t + h / 2, v + h / 2 * k2)
    k4 = rhs(t + h, v + h * k3)
    return v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def driven_generator(params: PhysicalParams, drive: DriveConfig, probe_omega: float):
    """(M, f) of dV/dt = M V + f in the frame rotating at the probe frequency."""
    P = params
    M = np.array(
        [
            [-(1j * (P.omega_c - probe_omega) + P.kappa_c), -1j * P.g_1, -1j * P.g_2],
            [-1j * P.g_1, -(1j * (P.omega_1 - probe_omega) + P.kappa_1), 0.0],
            [-1j * P.g_2, 0.0, -(1j * (P.omega_2 - probe_omega) + P.kappa_2)],
        ],
        dtype=complex,
    )
    f = np.array(
        [math.sqrt(2 * P.alpha) * drive.p_in_1 + math.sqrt(2 * P.beta) * drive.p_in_2, 0.0, 0.0],
        dtype=complex,
    )
    return M, f


def max_rate(params: PhysicalParams) -> float:
    P = params
    return max(P.kappa_c, P.kappa_1, P.kappa_2, P.g_1, P.g_2)


def _check_dt(params, dt):
    limit = 0.1 / max_rate(params)
    if not 0 < dt < limit:
        raise DomainError(f"dt={dt!r} must lie in (0, {limit:.6g})")


def integrate_driven(params: PhysicalParams, drive: DriveConfig, probe_omega: float,
                     t_end: float, dt: float, initial: StateVector | None = None,
                     strict: bool = True) -> DrivenResult:
    """Driven mean-field equations integrated to ``t_end``.

    Convergence means the state changed by less than 1e-8 (relative) over the
    last 10% of the horizon. With ``strict`` a non-converged run raises
    NotConverged; otherwise the result carries ``converged=False``.
    """
    _check_dt(params, dt)
    M, f = driven_generator(params, drive, probe_omega)
    P, Q = rk4_propagator(M, dt)
    Qf = Q @ f
    v = np.zeros(3, dtype=complex) if initial is None else initial.to_array()
    v0_norm = float(np.linalg.norm(v))
    n_steps = int(math.ceil(t_end / dt))
    n_mark = int(math.floor(0.9 * n_steps))
    mark = v
    for k in range(n_steps):
        if k == n_mark:
            mark = v
        v = P @ v + Qf
    if not np.all(np.isfinite(v)):
        raise StabilityError("driven integration overflowed")
    ref = max(float(np.linalg.norm(v)), v0_norm)
    drift = float(np.linalg.norm(v - mark)) / ref if ref > 0 else 0.0
    converged = drift < CONVERGENCE_RTOL
    if strict and not converged:
        raise NotConverged(f"relative drift {drift:.3g} over the last 10% of t_end={t_end}", drift)
    return DrivenResult(StateVector.from_array(v), converged, drift)


def integrate_effective(params: PhysicalParams, initial: StateVector, t_end: float, dt: float,
                        sample_every: int = 1) -> Trajectory:
    """Undriven effective evolution dV/dt = -i H_eff V, sampled every few steps.

    Off the manifold a warning is issued. Growth far beyond what the
    eigenvalues allow raises StabilityError.
    """
    _check_dt(params, dt)
    if not on_manifold(params):
        warnings.warn("parameters are off the pseudo-Hermitian manifold", RuntimeWarning, stacklevel=2)
    H = build_effective_hamiltonian(params)
    P, _ = rk4_propagator(-1j * H, dt)
    growth = max(0.0, float(np.max(np.linalg.eigvals(H).imag)))
    hnorm = float(np.linalg.norm(H - params.omega_c * np.eye(3), 2))

    v = initial.to_array()
    n0 = max(float(np.linalg.norm(v)), np.finfo(float).tiny)
    n_steps = int(math.ceil(t_end / dt))
    ts = [0.0]
    out = [v]
    for k in range(1, n_steps + 1):
        v = P @ v
        if k % sample_every == 0 or k == n_steps:
            t = k * dt
            bound = 1e6 * n0 * (1.0 + hnorm * t) ** 2 * math.exp(growth * t)
            nv = float(np.linalg.norm(v))
            if not math.isfinite(nv) or nv > bound:
                raise StabilityError(f"norm {nv:.3g} exceeds the spectral bound {bound:.3g} at t={t:.6g}")
            ts.append(t)
            out.append(v)
    return Trajectory(np.array(ts), np.array(out))


def estimate_frequencies(traj: Trajectory, n_modes: int = 3) -> np.ndarray:
    """Complex frequencies w with V(t) ~ sum c exp(-i w t), by linear prediction.

    All components of the trajectory share one recurrence of order
    ``n_modes``; its characteristic roots z give w = i log(z) / dt_sample.
    The sample spacing must keep |Re w| dt_sample below pi.
    """
    t = traj.t
    dts = np.diff(t)
    if not np.allclose(dts[:-1], dts[0], rtol=1e-9):
        raise DomainError("linear prediction needs uniformly spaced samples")
    step = dts[0]
    X = traj.states[: len(t) - 1] if not np.isclose(dts[-1], step, rtol=1e-9) else traj.states
    rows, rhs = [], []
    for comp in range(X.shape[1]):
        x = X[:, comp]
        scale = np.max(np.abs(x))
        if scale == 0:
            continue
        for n in range(len(x) - n_modes):
            rows.append(x[n:n + n_modes] / scale)
            rhs.append(x[n + n_modes] / scale)
    A = np.array(rows)
    coef, *_ = np.linalg.lstsq(A, np.array(rhs), rcond=None)
    # x[n+m] = sum_k coef[k] x[n+k]
    z = np.roots(np.concatenate(([1.0], -coef[::-1])))
    return np.sort_complex(1j * np.log(z) / step)
