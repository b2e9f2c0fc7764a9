"""
Parameter model of the two-emitter / one-cavity system.

All frequencies share one unit (the examples and configs use X/2pi in MHz).
Every relation below is homogeneous of degree one in frequency, so no
factors of 2pi appear anywhere.

The pseudo-Hermitian manifold is parametrised by the ratios
``p = kappa_1 / kappa_2`` and ``q = g_1 / g_2`` together with ``kappa_2`` and
``g_2``; :func:`derive_params` turns such a :class:`RatioSpec` into a full
:class:`PhysicalParams`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolation, DomainError, InfeasibleCoupling

MANIFOLD_RTOL = 1e-9


@dataclass(frozen=True)
class PhysicalParams:
    omega_c: float
    omega_1: float
    omega_2: float
    g_1: float
    g_2: float
    kappa_1: float
    kappa_2: float
    alpha: float
    beta: float
    kappa_int: float

    def __post_init__(self):
        for name in ("g_1", "g_2", "kappa_1", "kappa_2", "alpha", "beta", "kappa_int"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise DomainError(f"{name} must be non-negative, got {value!r}")

    @property
    def kappa_c(self) -> float:
        """Total passive cavity decay alpha + beta + kappa_int."""
        return self.alpha + self.beta + self.kappa_int

    @property
    def kappa_e(self) -> float:
        """Effective cavity gain alpha + beta - kappa_int under the CPA drive."""
        return self.alpha + self.beta - self.kappa_int

    @property
    def delta_1(self) -> float:
        return self.omega_c - self.omega_1

    @property
    def delta_2(self) -> float:
        return self.omega_c - self.omega_2


@dataclass(frozen=True)
class RatioSpec:
    p: float
    q: float
    kappa_2: float
    g_2: float
    omega_c: float = 0.0
    delta_1_sign: int = 1

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0 and self.kappa_2 > 0):
            raise DomainError(
                f"p, q and kappa_2 must be positive (got {self.p}, {self.q}, {self.kappa_2})"
            )
        if not self.g_2 >= 0:
            raise DomainError(f"g_2 must be non-negative, got {self.g_2!r}")
        if self.delta_1_sign not in (1, -1):
            raise DomainError(f"delta_1_sign must be +1 or -1, got {self.delta_1_sign!r}")


@dataclass(frozen=True)
class CubicCoeffs:
    """Real coefficients of x^3 + B x^2 + C x + D with x = w - omega_c.

    ``a``, ``b``, ``c`` are the multiple-root discriminant quantities
    and ``disc = b^2 - 4ac``: positive for one real root plus a conjugate
    pair, negative for three distinct real roots, zero at a multiple root.
    """

    B: float
    C: float
    D: float
    a: float = field(init=False)
    b: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        B, C, D = self.B, self.C, self.D
        object.__setattr__(self, "a", B * B - 3.0 * C)
        object.__setattr__(self, "b", B * C - 9.0 * D)
        object.__setattr__(self, "c", C * C - 3.0 * B * D)

    @property
    def disc(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c

    def __call__(self, x):
        return ((x + self.B) * x + self.C) * x + self.D

    def derivative(self, x):
        return (3.0 * x + 2.0 * self.B) * x + self.C

    def scale(self) -> float:
        """Characteristic root magnitude max(|B|, |C|^1/2, |D|^1/3)."""
        return max(abs(self.B), math.sqrt(abs(self.C)), abs(self.D) ** (1.0 / 3.0))


class PhaseTag(enum.Enum):
    THREE_REAL_DISTINCT = "ThreeRealDistinct"
    ONE_REAL_PLUS_CONJUGATE_PAIR = "OneRealPlusConjugatePair"
    EP2 = "EP2"
    EP3 = "EP3"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SpectralPhase:
    tag: PhaseTag
    tol: float

    def __str__(self):
        return self.tag.value


def _require_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value!r}")


def g2_min(p: float, q: float, kappa_2: float) -> float:
    """Smallest g_2 for which the emitter-1 detuning is real."""
    _require_positive(p=p, q=q, kappa_2=kappa_2)
    return math.sqrt(p * (p + 1.0) / (q * q + p)) * kappa_2


def delta_1_squared(p: float, q: float, kappa_2: float, g_2: float) -> float:
    return (q * q + p) / (p * (p + 1.0)) * g_2 * g_2 - kappa_2 * kappa_2


def derive_params(spec: RatioSpec, mirrors=None, rtol: float = MANIFOLD_RTOL) -> PhysicalParams:
    """Full parameter set on the pseudo-Hermitian manifold.

    Parameters
    ----------
    spec : RatioSpec
    mirrors : (alpha, beta, kappa_int), optional
        Split of the cavity rates. Only ``alpha + beta - kappa_int`` is fixed
        by the manifold (it must equal ``(p + 1) kappa_2``); the split matters
        for the response functions but not for the spectrum. When omitted,
        ``alpha = beta = kappa_e / 2`` and ``kappa_int = 0``.
    rtol : float
        Relative tolerance on the gain constraint.

    Raises
    ------
    InfeasibleCoupling
        If ``spec.g_2 < g2_min``.
    ConstraintViolation
        If the mirror triple does not reproduce the required gain.
    """
    p, q, k2, g2 = spec.p, spec.q, spec.kappa_2, spec.g_2
    gmin = g2_min(p, q, k2)
    d1sq = delta_1_squared(p, q, k2, g2)
    if g2 < gmin:
        # exactly-at-minimum inputs can land a few ulp low
        if d1sq < -8 * np.finfo(float).eps * k2 * k2:
            raise InfeasibleCoupling(g2, gmin)
    d1 = spec.delta_1_sign * math.sqrt(max(d1sq, 0.0))
    d2 = -p * d1
    kappa_e = (p + 1.0) * k2

    if mirrors is None:
        alpha = beta = 0.5 * kappa_e
        kappa_int = 0.0
    else:
        alpha, beta, kappa_int = (float(m) for m in mirrors)
        residual = alpha + beta - kappa_int - kappa_e
        if abs(residual) > rtol * kappa_e:
            raise ConstraintViolation(
                f"alpha + beta - kappa_int = {alpha + beta - kappa_int!r} but the "
                f"manifold requires (p + 1) kappa_2 = {kappa_e!r}",
                residual,
            )

    return PhysicalParams(
        omega_c=spec.omega_c,
        omega_1=spec.omega_c - d1,
        omega_2=spec.omega_c - d2,
        g_1=q * g2,
        g_2=g2,
        kappa_1=p * k2,
        kappa_2=k2,
        alpha=alpha,
        beta=beta,
        kappa_int=kappa_int,
    )


def check_pseudo_hermiticity(params: PhysicalParams) -> tuple[float, float, float]:
    """Residuals of the three manifold constraints; all vanish on the manifold."""
    k1, k2, ke = params.kappa_1, params.kappa_2, params.kappa_e
    d1, d2 = params.delta_1, params.delta_2
    return (
        k1 + k2 - ke,
        k1 * d1 + k2 * d2,
        ke * (d1 * d2 - k1 * k2) + params.g_2**2 * k1 + params.g_1**2 * k2,
    )


def on_manifold(params: PhysicalParams, rtol: float = MANIFOLD_RTOL) -> bool:
    r0, r1, r2 = check_pseudo_hermiticity(params)
    k = max(params.kappa_2, params.kappa_1, abs(params.delta_1), params.g_2, params.g_1)
    return abs(r0) <= rtol * k and abs(r1) <= rtol * k * k and abs(r2) <= rtol * k**3


def zeta(p: float, q: float) -> float:
    """EP3 feasibility ratio; the EP3 lies above g2_min iff zeta <= 1."""
    _require_positive(p=p, q=q)
    return p * (p + 1.0) * (q * q + 1.0) / ((p * p + p + 1.0) * (q * q + p))


def g_ep3_analytic(p: float, q: float, kappa_2: float) -> tuple[float, float]:
    """Coupling where a = B^2 - 3C vanishes, and the matching detuning.

    Returns ``(g_ep3, delta_ep3)``. ``delta_ep3`` is NaN when zeta > 1
    (the candidate lies below g2_min). For p = q = 1 this is the exact
    triple point; otherwise it only seeds the numeric search.
    """
    _require_positive(p=p, q=q, kappa_2=kappa_2)
    s = (p + q * q) / (p * (p + 1.0)) + 3.0 * (q * q + 1.0) / (p * p + p + 1.0)
    g = 2.0 * kappa_2 / math.sqrt(s)
    d1sq = delta_1_squared(p, q, kappa_2, g)
    delta = math.sqrt(d1sq) if d1sq >= 0 else math.nan
    return g, delta


def build_effective_hamiltonian(params: PhysicalParams) -> np.ndarray:
    """3x3 generator H_eff of dV/dt = -i H_eff V for V = (a, sigma_1, sigma_2)."""
    P = params
    return np.array(
        [
            [P.omega_c + 1j * P.kappa_e, P.g_1, P.g_2],
            [P.g_1, P.omega_1 - 1j * P.kappa_1, 0.0],
            [P.g_2, 0.0, P.omega_2 - 1j * P.kappa_2],
        ],
        dtype=complex,
    )


def fbg_rates(length_l, R1, R2, eta, speed_of_light):
    """Mirror decay rates of a Fabry-Perot fibre cavity with FBG mirrors.

    Returns ``(alpha, beta, kappa_c)`` in the unit of ``speed_of_light / length_l``.
    """
    if not length_l > 0:
        raise DomainError(f"cavity length must be positive, got {length_l!r}")
    for name, R in (("R1", R1), ("R2", R2)):
        if not 0.0 <= R <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {R!r}")
    if not eta >= 0:
        raise DomainError(f"eta must be non-negative, got {eta!r}")
    rate = speed_of_light / (4.0 * length_l)
    alpha = rate * (1.0 - R1)
    beta = rate * (1.0 - R2)
    return alpha, beta, rate * ((1.0 - R1) + (1.0 - R2) + 2.0 * eta)


def position_coupling(g_i, z_i, lambda_c):
    """Standing-wave coupling g_i cos(2 pi z_i / lambda_c); may be negative."""
    if not lambda_c > 0:
        raise DomainError(f"lambda_c must be positive, got {lambda_c!r}")
    return g_i * np.cos(2.0 * np.pi * z_i / lambda_c)
