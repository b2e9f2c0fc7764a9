"""
Frequency-domain response of the driven cavity.

Every function accepts a scalar probe frequency or a numpy array of them.
Output amplitudes follow the input-output convention
``p_out_i = sqrt(2 rate_i) a - p_in_i``.

On the manifold the CPA residual ``i(w - omega_c) + kappa_e + Sigma(w)`` is,
for real ``w``, the characteristic polynomial of H_eff divided by the two
emitter factors, so the CPA frequencies are exactly the real eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq
from scipy.signal import find_peaks

from .core import PhysicalParams, build_effective_hamiltonian
from .errors import DomainError, PoleError

CPA_ACCEPT_RTOL = 1e-9


@dataclass(frozen=True)
class DriveConfig:
    p_in_1: complex
    p_in_2: complex

    @classmethod
    def cpa_ratio(cls, params: PhysicalParams, p_in_1: complex = 1.0) -> "DriveConfig":
        """Equal-phase drive with p_in_2 / p_in_1 = sqrt(beta / alpha)."""
        if not params.alpha > 0:
            raise DomainError("cpa_ratio needs alpha > 0")
        return cls(p_in_1, math.sqrt(params.beta / params.alpha) * p_in_1)

    @property
    def power(self) -> float:
        return abs(self.p_in_1) ** 2 + abs(self.p_in_2) ** 2


@dataclass(frozen=True)
class ResponsePoint:
    omega: float
    sigma: complex
    a_amp: complex
    s: complex
    total_output: float
    transmission: float
    absorption: float


def self_energy(omega, params: PhysicalParams):
    """Complex frequency shift of the cavity from the two emitters."""
    P = params
    w = np.asarray(omega, dtype=float)
    d1 = 1j * (w - P.omega_1) - P.kappa_1
    d2 = 1j * (w - P.omega_2) - P.kappa_2
    if (P.g_1 != 0 and np.any(d1 == 0)) or (P.g_2 != 0 and np.any(d2 == 0)):
        raise PoleError("probe frequency sits on an undamped emitter resonance")
    with np.errstate(divide="ignore", invalid="ignore"):
        sig = (P.g_1**2 / d1 if P.g_1 else 0.0) + (P.g_2**2 / d2 if P.g_2 else 0.0)
    sig = np.asarray(sig, dtype=complex) + np.zeros_like(w, dtype=complex)
    return sig[()] if sig.ndim == 0 else sig


def _denominator(omega, params):
    w = np.asarray(omega, dtype=float)
    return 1j * (w - params.omega_c) - params.kappa_c + self_energy(w, params)


def _safe_ratio(num, den):
    den = np.asarray(den, dtype=complex)
    num = np.broadcast_to(np.asarray(num, dtype=complex), den.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, complex(np.inf), num / np.where(den == 0, 1.0, den))
    return out[()] if out.ndim == 0 else out


def intracavity_field(omega, params: PhysicalParams, drive: DriveConfig):
    """Steady intracavity amplitude; infinite where the denominator vanishes."""
    num = -(math.sqrt(2 * params.alpha) * drive.p_in_1 + math.sqrt(2 * params.beta) * drive.p_in_2)
    den = _denominator(omega, params)
    if num == 0:
        return np.zeros_like(den)[()] if np.ndim(den) == 0 else np.zeros_like(den)
    return _safe_ratio(num, den)


def s_parameter(omega, params: PhysicalParams):
    """Common reflection coefficient S_1 = S_2 under the CPA-ratio drive."""
    den = _denominator(omega, params)
    return -1.0 - _safe_ratio(2 * params.alpha + 2 * params.beta, den)


def total_output(omega, params: PhysicalParams):
    """|S_1|^2 + |S_2|^2."""
    return 2.0 * np.abs(s_parameter(omega, params)) ** 2


def output_fields(omega, params: PhysicalParams, drive: DriveConfig):
    a = intracavity_field(omega, params, drive)
    p1 = math.sqrt(2 * params.alpha) * a - drive.p_in_1
    p2 = math.sqrt(2 * params.beta) * a - drive.p_in_2
    return p1, p2


def _check_drive(drive):
    if drive.power == 0:
        raise DomainError("drive amplitudes are both zero")


def transmission(omega, params: PhysicalParams, drive: DriveConfig):
    """Power leaving port 2 normalised by the total input power."""
    _check_drive(drive)
    _, p2 = output_fields(omega, params, drive)
    return np.abs(p2) ** 2 / drive.power


def absorption(omega, params: PhysicalParams, drive: DriveConfig):
    """1 - total outgoing power / total incoming power."""
    _check_drive(drive)
    p1, p2 = output_fields(omega, params, drive)
    return 1.0 - (np.abs(p1) ** 2 + np.abs(p2) ** 2) / drive.power


def cpa_residual(omega, params: PhysicalParams):
    """i(w - omega_c) + kappa_e + Sigma(w); zero exactly at CPA frequencies."""
    w = np.asarray(omega, dtype=float)
    return 1j * (w - params.omega_c) + params.kappa_e + self_energy(w, params)


def _residual_numerator(params: PhysicalParams):
    """R(w) d1(w) d2(w) as a complex polynomial in x = w - omega_c."""
    P = params
    lin = lambda c0: Polynomial([c0, 1j])
    d1 = lin(1j * P.delta_1 - P.kappa_1)
    d2 = lin(1j * P.delta_2 - P.kappa_2)
    return lin(P.kappa_e) * d1 * d2 + P.g_1**2 * d2 + P.g_2**2 * d1


def _polish(poly: Polynomial, x: float, steps: int = 3) -> float:
    dpoly = poly.deriv()
    for _ in range(steps):
        d = dpoly(x)
        if d == 0:
            break
        y = x - poly(x) / d
        if not abs(poly(y)) < abs(poly(x)):
            break
        x = y
    return x


def cpa_frequencies(params: PhysicalParams, n_grid: int = 8001) -> list[float]:
    """Real frequencies where both output ports vanish under the CPA drive.

    Candidates come from sign changes of Im R on a grid covering every
    possible real eigenvalue (refined by brentq) and from the real roots of
    the cubic numerator of R, which also catches roots where Im R only
    touches zero. Roots with |R| < 1e-9 kappa_2 are kept.
    """
    k2 = params.kappa_2
    # any eigenvalue lies within the Frobenius norm of H - omega_c
    h = build_effective_hamiltonian(params) - params.omega_c * np.eye(3)
    half = 1.05 * np.linalg.norm(h) + k2
    grid = params.omega_c + np.linspace(-half, half, n_grid)
    im = cpa_residual(grid, params).imag
    f = lambda w: float(np.imag(cpa_residual(w, params)))

    candidates = list(grid[im == 0.0])
    flips = np.nonzero((im[:-1] != 0.0) & (im[1:] != 0.0) & ((im[:-1] > 0) != (im[1:] > 0)))[0]
    for i in flips:
        candidates.append(brentq(f, grid[i], grid[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps))

    num = _residual_numerator(params)
    for part in (Polynomial(num.coef.real), Polynomial(num.coef.imag)):
        if not np.any(part.coef):
            continue
        for x in part.roots():
            if abs(x.imag) <= 1e-6 * max(1.0, abs(x)):
                candidates.append(params.omega_c + _polish(part, float(x.real)))

    accept = CPA_ACCEPT_RTOL * k2
    found = sorted(float(w) for w in candidates if abs(cpa_residual(w, params)) < accept)
    merged = []
    for w in found:
        if merged and w - merged[-1] <= accept:
            # keep whichever duplicate has the smaller residual
            if abs(cpa_residual(w, params)) < abs(cpa_residual(merged[-1], params)):
                merged[-1] = w
            continue
        merged.append(w)
    return merged


@dataclass
class ResponseTable:
    """Response quantities on a probe grid (all arrays share one axis)."""

    omega_c: float
    detuning: np.ndarray
    sigma: np.ndarray
    a_amp: np.ndarray
    s: np.ndarray
    total_output: np.ndarray
    transmission: np.ndarray
    absorption: np.ndarray

    @property
    def omega(self):
        return self.omega_c + self.detuning

    def __len__(self):
        return len(self.detuning)

    def __getitem__(self, i) -> ResponsePoint:
        return ResponsePoint(
            float(self.omega[i]), complex(self.sigma[i]), complex(self.a_amp[i]), complex(self.s[i]),
            float(self.total_output[i]), float(self.transmission[i]), float(self.absorption[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def default_omega_range(params: PhysicalParams):
    return (-10.0 * params.kappa_2, 10.0 * params.kappa_2)


def spectrum_sweep(params: PhysicalParams, omega_range=None, n_points: int = 2001,
                   drive: DriveConfig | None = None) -> ResponseTable:
    """All response quantities on a linear grid of detunings w - omega_c.

    ``omega_range`` defaults to +-10 kappa_2 and ``drive`` to the CPA-ratio
    drive with unit amplitude at port 1.
    """
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    if omega_range is None:
        omega_range = default_omega_range(params)
    if drive is None:
        drive = DriveConfig.cpa_ratio(params)
    det = np.linspace(float(omega_range[0]), float(omega_range[1]), n_points)
    w = params.omega_c + det
    s = s_parameter(w, params)
    return ResponseTable(
        omega_c=params.omega_c,
        detuning=det,
        sigma=self_energy(w, params),
        a_amp=intracavity_field(w, params, drive),
        s=s,
        total_output=2.0 * np.abs(s) ** 2,
        transmission=transmission(w, params, drive),
        absorption=absorption(w, params, drive),
    )


def spectral_peaks(y, prominence_frac: float = 1e-4) -> np.ndarray:
    """Indices of strict local maxima with prominence above a floor.

    The floor is ``prominence_frac`` times the range of ``y``.
    """
    y = np.asarray(y, dtype=float)
    span = float(y.max() - y.min())
    if span == 0:
        return np.array([], dtype=int)
    idx, _ = find_peaks(y, prominence=prominence_frac * span)
    return idx
