"""
Spectrum of the effective Hamiltonian and exceptional-point search.

On the pseudo-Hermitian manifold the characteristic polynomial of H_eff is
real in x = w - omega_c, so the spectrum is either three real eigenvalues or
one real eigenvalue plus a complex-conjugate pair. Exceptional points are the
multiple roots, located through the discriminant b^2 - 4ac of the
(a, b, c) = (B^2 - 3C, BC - 9D, C^2 - 3BD) family.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .core import (
    CubicCoeffs,
    PhaseTag,
    PhysicalParams,
    RatioSpec,
    SpectralPhase,
    build_effective_hamiltonian,
    derive_params,
    g2_min,
    g_ep3_analytic,
    zeta,
)
from .errors import ClassificationError, DomainError

DEFAULT_PHASE_RTOL = 1e-6
SNAP_RTOL = 1e-7


@dataclass(frozen=True)
class SpectrumTriple:
    eigenvalues: tuple[complex, complex, complex]
    phase: SpectralPhase | None
    coeffs: CubicCoeffs | None
    omega_c: float = 0.0

    def real_eigenvalues(self, tol=None) -> list[float]:
        if tol is None:
            tol = self.phase.tol if self.phase is not None else 0.0
        return sorted(w.real for w in self.eigenvalues if abs(w.imag) < tol)

    def max_imag(self) -> float:
        return max(w.imag for w in self.eigenvalues)

    def max_gap(self) -> float:
        return max(abs(u - v) for u, v in itertools.combinations(self.eigenvalues, 2))


def cubic_coefficients(params: PhysicalParams) -> CubicCoeffs:
    """B, C, D from the raw parameters (valid on the manifold)."""
    P = params
    d1, d2 = P.delta_1, P.delta_2
    k1, k2, ke = P.kappa_1, P.kappa_2, P.kappa_e
    g1s, g2s = P.g_1**2, P.g_2**2
    return CubicCoeffs(
        B=d1 + d2,
        C=d1 * d2 - k1 * k2 + ke * ke - g1s - g2s,
        D=ke * (d1 * k2 + k1 * d2) - g2s * d1 - g1s * d2,
    )


def cubic_coefficients_ratio(spec: RatioSpec) -> CubicCoeffs:
    """B, C, D written directly in the ratio parametrisation."""
    p, q, k2, g2 = spec.p, spec.q, spec.kappa_2, spec.g_2
    d1 = derive_params(spec).delta_1
    k2s, g2s = k2 * k2, g2 * g2
    return CubicCoeffs(
        B=(1.0 - p) * d1,
        C=-p * d1 * d1 + (p * p + p + 1.0) * k2s - (q * q + 1.0) * g2s,
        D=(p + 1.0) * (1.0 - p * p) * d1 * k2s - (1.0 - p * q * q) * g2s * d1,
    )


def _cardano_roots(B, C, D):
    """Roots of x^3 + Bx^2 + Cx + D, real roots first."""
    s = max(abs(B), math.sqrt(abs(C)), abs(D) ** (1.0 / 3.0))
    if s == 0.0:
        return [0j] * 3
    # solve for x / s so intermediate powers neither underflow nor overflow
    return [s * r for r in _cardano_unit(B / s, C / s / s, D / s / s / s)]


def _cardano_unit(B, C, D):
    shift = B / 3.0
    P = C - B * shift
    Q = (2.0 * B * B * B) / 27.0 - B * C / 3.0 + D
    if P == 0.0 and Q == 0.0:
        return [complex(-shift)] * 3
    h = 0.25 * Q * Q + (P / 3.0) ** 3
    if h > 0.0:
        # Cardano with the cancellation-free choice of cube root
        A = -math.copysign(1.0, Q) * np.cbrt(0.5 * abs(Q) + math.sqrt(h))
        Bc = -P / (3.0 * A) if A != 0.0 else 0.0
        t1 = A + Bc
        re = -0.5 * t1
        im = 0.5 * math.sqrt(3.0) * abs(A - Bc)
        return [complex(t1 - shift), complex(re - shift, im), complex(re - shift, -im)]
    # three real roots: trigonometric form (P < 0 here)
    m = 2.0 * math.sqrt(-P / 3.0)
    arg = 3.0 * Q / (P * m)
    theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
    return [complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift) for k in range(3)]


def _newton_polish(coeffs: CubicCoeffs, x: complex) -> complex:
    fx = coeffs(x)
    dfx = coeffs.derivative(x)
    if dfx == 0:
        return x
    y = x - fx / dfx
    if x.imag == 0.0:
        y = complex(y.real)
    return y if abs(coeffs(y)) < abs(fx) else x


def _snap(xs, scale):
    """Merge roots closer than SNAP_RTOL * scale (classification only)."""
    xs = list(xs)
    thresh = SNAP_RTOL * scale
    if all(abs(u - v) < thresh for u, v in itertools.combinations(xs, 2)):
        m = sum(xs) / 3.0
        return [complex(m.real)] * 3
    for i, j in itertools.combinations(range(3), 2):
        if abs(xs[i] - xs[j]) < thresh:
            m = complex((0.5 * (xs[i] + xs[j])).real)
            xs[i] = xs[j] = m
            break
    return xs


def classify_phase(eigenvalues, tol: float) -> SpectralPhase:
    """Spectral phase of an eigenvalue triple.

    EP3 when all three coincide within ``tol``, EP2 when exactly one pair
    does, otherwise three distinct real values or one real value plus a
    conjugate pair. Anything else (e.g. an unpaired complex eigenvalue,
    which happens off the manifold) raises ClassificationError.
    """
    ws = [complex(w) for w in eigenvalues]
    if len(ws) != 3:
        raise ClassificationError(f"expected three eigenvalues, got {len(ws)}")
    close = [(i, j) for i, j in itertools.combinations(range(3), 2) if abs(ws[i] - ws[j]) < tol]
    if len(close) == 3:
        return SpectralPhase(PhaseTag.EP3, tol)
    if len(close) == 2:
        raise ClassificationError(f"eigenvalues {ws} chain-coalesce without a common value")
    if len(close) == 1:
        (i, j), = close
        (k,) = {0, 1, 2} - {i, j}
        if abs(ws[k].imag) >= tol or abs(0.5 * (ws[i] + ws[j]).imag) >= tol:
            raise ClassificationError(f"degenerate pair in {ws} is not real")
        return SpectralPhase(PhaseTag.EP2, tol)
    complex_idx = [i for i, w in enumerate(ws) if abs(w.imag) >= tol]
    if not complex_idx:
        return SpectralPhase(PhaseTag.THREE_REAL_DISTINCT, tol)
    if len(complex_idx) == 2:
        u, v = (ws[i] for i in complex_idx)
        if abs(u - v.conjugate()) < tol:
            return SpectralPhase(PhaseTag.ONE_REAL_PLUS_CONJUGATE_PAIR, tol)
    raise ClassificationError(f"eigenvalues {ws} are not closed under conjugation")


def _sort_key(w: complex):
    return (round(w.real, 12), w.imag)


def solve_cubic(coeffs: CubicCoeffs, omega_c: float = 0.0, tol: float | None = None) -> SpectrumTriple:
    """Closed-form roots of the real characteristic cubic.

    Returned eigenvalues are absolute (``omega_c + x``), each refined by one
    guarded Newton step. Roots closer than 1e-7 of the coefficient scale are
    merged before classification; the reported values stay unmerged.
    ``tol`` defaults to 1e-6 of the coefficient scale.
    """
    B, C, D = coeffs.B, coeffs.C, coeffs.D
    if not all(math.isfinite(v) for v in (B, C, D)):
        raise DomainError(f"non-finite cubic coefficients {(B, C, D)}")
    scale = coeffs.scale()
    if tol is None:
        tol = DEFAULT_PHASE_RTOL * scale if scale > 0 else DEFAULT_PHASE_RTOL
    roots = _cardano_roots(B, C, D)
    if roots[1].imag != 0.0:
        r0 = _newton_polish(coeffs, roots[0])
        r1 = _newton_polish(coeffs, roots[1])
        if r1.imag == 0.0:
            r1 = roots[1]
        roots = [r0, r1, r1.conjugate()]
    else:
        roots = [_newton_polish(coeffs, r) for r in roots]
    phase = classify_phase(_snap(roots, scale), tol)
    eig = tuple(sorted((omega_c + r for r in roots), key=_sort_key))
    return SpectrumTriple(eig, phase, coeffs, omega_c)


def phase_tol(params: PhysicalParams) -> float:
    return DEFAULT_PHASE_RTOL * params.kappa_2


def spectrum(params: PhysicalParams, tol: float | None = None) -> SpectrumTriple:
    """solve_cubic on the coefficients of ``params`` with tol = 1e-6 kappa_2."""
    if tol is None:
        tol = phase_tol(params)
    return solve_cubic(cubic_coefficients(params), params.omega_c, tol)


def eigenvalues_direct(params: PhysicalParams, tol: float | None = None) -> SpectrumTriple:
    """Eigenvalues of the full complex matrix by a general eigen-solver.

    Makes no use of the manifold constraints. Off the manifold the phase is
    usually unclassifiable and is then returned as ``None``.
    """
    if tol is None:
        tol = phase_tol(params)
    w = np.linalg.eigvals(build_effective_hamiltonian(params))
    eig = tuple(sorted((complex(x) for x in w), key=_sort_key))
    try:
        phase = classify_phase(eig, tol)
    except ClassificationError:
        phase = None
    return SpectrumTriple(eig, phase, None, params.omega_c)


def match_eigenvalues(ref, other):
    """Permutation of ``other`` closest to ``ref`` (max-distance criterion)."""
    best = min(
        itertools.permutations(other),
        key=lambda perm: (max(abs(u - v) for u, v in zip(ref, perm)),
                          sum(abs(u - v) for u, v in zip(ref, perm))),
    )
    return tuple(best)


@dataclass
class SweepTable:
    """Eigenvalues along a g_2 grid; infeasible rows hold NaN and no phase."""

    g2: np.ndarray
    eigenvalues: np.ndarray
    feasible: np.ndarray
    phases: list

    def __len__(self):
        return len(self.g2)

    def phase_sequence(self, include_eps: bool = False) -> list[PhaseTag]:
        """Consecutive-distinct phase tags over the feasible rows."""
        seq = []
        for tag in self.phases:
            if tag is None:
                continue
            if not include_eps and tag in (PhaseTag.EP2, PhaseTag.EP3):
                continue
            if not seq or seq[-1] != tag:
                seq.append(tag)
        return seq


def _spec_at(template: RatioSpec, g2: float) -> RatioSpec:
    return replace(template, g_2=float(g2))


def sweep_eigenvalues(template: RatioSpec, g2_range, n_points: int, mirrors=None) -> SweepTable:
    """Eigenvalues and phase tags on a linear g_2 grid.

    Points below g2_min are flagged infeasible. Branches are kept contiguous
    by nearest-neighbour matching between consecutive feasible rows.
    """
    lo, hi = map(float, g2_range)
    if n_points < 1 or not hi >= lo or (n_points > 1 and hi == lo):
        raise DomainError(f"empty g2 range {g2_range!r} with {n_points} points")
    grid = np.linspace(lo, hi, n_points)
    gmin = g2_min(template.p, template.q, template.kappa_2)
    eig = np.full((n_points, 3), np.nan + 1j * np.nan)
    feasible = np.zeros(n_points, dtype=bool)
    phases = [None] * n_points
    prev = None
    for i, g in enumerate(grid):
        if g < gmin:
            continue
        s = spectrum(derive_params(_spec_at(template, g), mirrors))
        ws = s.eigenvalues if prev is None else match_eigenvalues(prev, s.eigenvalues)
        eig[i] = ws
        feasible[i] = True
        phases[i] = s.phase.tag
        prev = ws
    return SweepTable(grid, eig, feasible, phases)


@dataclass(frozen=True)
class EpRecord:
    """One located exceptional point.

    ``coalescence_gap`` is sqrt|a|, the distance between the double root and
    the remaining root at g2_star (zero at a true EP3). ``exact`` is False
    for order-3 records that are the closest approach to triple coalescence
    rather than an a = b = 0 point.
    """

    g2_star: float
    order: int
    eigenvalue_at_ep: complex
    a: float
    b: float
    disc: float
    coalescence_gap: float
    exact: bool = True

    @property
    def residuals(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.disc)


@dataclass(frozen=True)
class SeedReport:
    """The analytic a = 0 candidate and the eigenvalue spread found there."""

    g2: float
    delta_1: float
    zeta: float
    feasible: bool
    eigen_gap: float


def analytic_seed(template: RatioSpec, mirrors=None) -> SeedReport:
    g, delta = g_ep3_analytic(template.p, template.q, template.kappa_2)
    z = zeta(template.p, template.q)
    feasible = g >= g2_min(template.p, template.q, template.kappa_2)
    gap = math.nan
    if feasible:
        gap = spectrum(derive_params(_spec_at(template, g), mirrors)).max_gap()
    return SeedReport(g, delta, z, feasible, gap)


def discriminant(template: RatioSpec, g2: float) -> float:
    return cubic_coefficients(derive_params(_spec_at(template, g2))).disc


def locate_eps(
    template: RatioSpec,
    g2_range,
    n_grid: int = 2000,
    ep3_tol: float = 1e-4,
    near_ep3_gap: float = 1.25,
) -> list[EpRecord]:
    """Exceptional points along g_2 from sign changes of the discriminant.

    Every bracket is refined to machine precision. A root with
    |a| < ep3_tol kappa_2^2 and |b| < ep3_tol kappa_2^3 is an exact EP3.
    When there is none, the root nearest the analytic a = 0 seed is reported
    as order 3 (``exact=False``) provided the seed is reachable (zeta <= 1)
    and its coalescence gap is at most ``near_ep3_gap * kappa_2``. All other
    roots are EP2s. A discriminant that touches zero without changing sign is
    not detected.
    """
    k2 = template.kappa_2
    gmin = g2_min(template.p, template.q, k2)
    lo, hi = map(float, g2_range)
    lo = max(lo, gmin)
    if not hi > lo:
        return []
    grid = np.linspace(lo, hi, n_grid)
    disc = np.array([discriminant(template, g) for g in grid])
    f = lambda g: discriminant(template, g)

    roots = []
    for i in range(n_grid):
        if disc[i] == 0.0:
            roots.append(grid[i])
        elif i + 1 < n_grid and disc[i + 1] != 0.0 and np.sign(disc[i]) != np.sign(disc[i + 1]):
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))

    records = []
    for g in roots:
        params = derive_params(_spec_at(template, g))
        cc = cubic_coefficients(params)
        s = solve_cubic(cc, params.omega_c, DEFAULT_PHASE_RTOL * k2)
        exact = abs(cc.a) < ep3_tol * k2**2 and abs(cc.b) < ep3_tol * k2**3
        if exact:
            w = sum(s.eigenvalues) / 3.0
        else:
            pair = min(itertools.combinations(s.eigenvalues, 2), key=lambda uv: abs(uv[0] - uv[1]))
            w = 0.5 * (pair[0] + pair[1])
        records.append(
            EpRecord(float(g), 3 if exact else 2, complex(w.real, 0.0), cc.a, cc.b, cc.disc,
                     math.sqrt(abs(cc.a)))
        )

    if records and not any(r.order == 3 for r in records):
        seed = analytic_seed(template)
        if seed.zeta <= 1.0:
            i = min(range(len(records)), key=lambda j: abs(records[j].g2_star - seed.g2))
            r = records[i]
            if r.coalescence_gap <= near_ep3_gap * k2:
                ws = spectrum(derive_params(_spec_at(template, r.g2_star))).eigenvalues
                records[i] = replace(r, order=3, exact=False,
                                     eigenvalue_at_ep=complex((sum(ws) / 3.0).real, 0.0))
    return sorted(records, key=lambda r: r.g2_star)
