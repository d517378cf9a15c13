"""
Phase shifts in an oscillatory sector and their threshold asymptotics.

A real regular solution at energy ``k**2`` behaves like
``C sin(k r + sigma_sr)`` with ``C > 0``.  As ``k -> 0``

    sigma_sr(k) + sigma ln k - sigma_per(sigma ln k + C1) -> C2,

so the phase shift grows like ``-sigma ln k`` with a log-periodic ripple.
For a perturbation supported in ``r <= R`` the constants follow from the
zero-energy solution through ``D = |D| e^{i theta0}``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy.optimize import least_squares, minimize_scalar
from scipy.special import binom

from . import specfun
from .greens import FitDegenerateError, detect_period, _harmonic_design
from .potentials import PotentialSpec, assemble_sector_potential
from .radial_ode import (
    BasisKind,
    asymptotic_coefficients,
    basis_functions,
    regular_solution,
    wronskian,
)

MODERATE_K = 0.1
PER_PERIOD_MIN = 48
TAIL_R_CAP = 1e4
C1_SCAN = 64
D_FLOOR = 1e-10
_TWO_PI = 2.0 * math.pi


class CoefficientDegenerateError(ArithmeticError):
    """Both asymptotic coefficients vanish, so no phase is defined."""


class UndersamplingError(ValueError):
    """The k grid is too coarse to follow the phase continuously."""


class DNearZeroError(ArithmeticError):
    """The threshold constant ``D`` is numerically zero."""


class DivergentIntegrandError(ValueError):
    """The semiclassical phase integral diverges at infinity (``mu <= 1``)."""


# -- single phase shifts ----------------------------------------------------------


@dataclass(frozen=True)
class PhaseShiftValue:
    k: float
    value: float
    error: float
    route: str


def tail_radius(k: float, cap: float = TAIL_R_CAP) -> float:
    """Outer radius used to extrapolate Hankel coefficients for a tail.

    ``max(cap, 320/k)`` keeps the sampling window ``[r/16, r]`` either
    fully in the small-``kr`` regime or fully in the oscillating one.
    """
    return max(cap, 320.0 / k)


def _hankel_route(spec: PotentialSpec, k: float, r_max: float | None):
    nu = spec.sector.nu
    support = spec.support_radius
    if support is not None:
        R = max(support, 2.0)
        sol = regular_solution(spec, k * k, R)
        u, du = sol(np.array([R]))
        pp, dpp, pm, dpm, w = basis_functions(BasisKind.HANKEL, nu, k, np.array([R]))
        ap = complex(wronskian(pm, dpm, u, du)[0] / w)
        err = 0.0
    else:
        coef = asymptotic_coefficients(spec, BasisKind.HANKEL, k, r_max=r_max or tail_radius(k))
        ap, err = coef.a_plus, coef.error
    if abs(ap) == 0.0:
        raise CoefficientDegenerateError(f"a+ vanishes at k = {k}")
    # u ~ 2 Re(a+ C_nu sqrt(2/(pi k)) e^{ikr}) and arg C_nu = -pi/4
    return math.atan2(ap.imag, ap.real) + math.pi / 4, err / abs(ap)


def _trig_route(spec: PotentialSpec, k: float, r_max: float | None):
    coef = asymptotic_coefficients(spec, BasisKind.TRIG, k, r_max=r_max or TAIL_R_CAP)
    ap, am = coef.a_plus.real, coef.a_minus.real
    norm = math.hypot(ap, am)
    if norm == 0.0:
        raise CoefficientDegenerateError(f"a+ and a- vanish at k = {k}")
    # (a+, a-) / |a| = (sin, cos) of the phase
    return math.atan2(ap, am), coef.error / norm


def phase_shift_value(spec: PotentialSpec, k: float, route: str = "auto",
                      r_max: float | None = None) -> PhaseShiftValue:
    """Phase shift at ``k`` with an error estimate and the route used.

    ``route`` is ``"hankel"`` (coefficients on ``r^(1/2) H_nu(kr)``, exact
    beyond a compact support), ``"trig"`` (coefficients on ``cos kr`` and
    ``sin kr``, extrapolated through the ``1/r^2`` tail) or ``"auto"``,
    which takes the Hankel route for compact support or ``k < MODERATE_K``.
    """
    k = float(k)
    if not k > 0:
        raise ValueError(f"phase shift needs k > 0, got {k}")
    if route == "auto":
        route = "hankel" if (spec.support_radius is not None or k < MODERATE_K) else "trig"
    if route == "hankel":
        value, err = _hankel_route(spec, k, r_max)
    elif route == "trig":
        value, err = _trig_route(spec, k, r_max)
    else:
        raise ValueError(f"unknown route {route!r}")
    return PhaseShiftValue(k, value % _TWO_PI, err, route)


def phase_shift(spec: PotentialSpec, k: float, route: str = "auto",
                r_max: float | None = None) -> float:
    """Phase shift ``sigma_sr(k)`` in ``[0, 2 pi)``.

    The regular solution is normalised at the origin independently of
    ``k``, so it tends to the zero-energy solution as ``k -> 0``.

    Examples
    --------
    >>> from critscat.potentials import preset
    >>> round(phase_shift(preset("compact-bump"), 1.0), 6)
    5.744446
    """
    return phase_shift_value(spec, k, route, r_max).value


# -- continuous curves ------------------------------------------------------------------


@dataclass
class PhaseShiftCurve:
    """Continuously unwrapped phase shift on a decreasing ``k`` grid."""

    k_grid: np.ndarray
    sigma_sr: np.ndarray
    anchor_k: float
    anchor_value: float
    errors: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def ln_k(self) -> np.ndarray:
        return np.log(self.k_grid)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ln_k", "sigma_sr"])
            for lk, s in zip(self.ln_k, self.sigma_sr):
                w.writerow([repr(float(lk)), repr(float(s))])

    def to_dict(self) -> dict:
        return {
            "k_grid": self.k_grid.tolist(),
            "sigma_sr": self.sigma_sr.tolist(),
            "anchor_k": self.anchor_k,
            "anchor_value": self.anchor_value,
        }


def default_k_grid(sigma: float, k_min: float = 1e-6, k_max: float = 1e-2,
                   per_period: int = PER_PERIOD_MIN) -> np.ndarray:
    """Decreasing log-spaced grid with ``per_period`` points per ``pi/sigma`` in ``ln k``."""
    n = int(math.ceil(math.log(k_max / k_min) / (math.pi / sigma) * per_period)) + 1
    return np.geomspace(k_max, k_min, n)


def unwrap_phase(raw) -> np.ndarray:
    """Continuous version of phases given modulo ``2 pi``.

    Raises
    ------
    UndersamplingError
        If two neighbours differ by more than ``pi/2`` modulo ``2 pi``.
    """
    raw = np.asarray(raw, dtype=float)
    step = np.angle(np.exp(1j * np.diff(raw)))
    if np.any(np.abs(step) > math.pi / 2):
        i = int(np.argmax(np.abs(step)))
        raise UndersamplingError(f"phase jumps by {step[i]:.3f} between grid points {i} and {i + 1}")
    return raw[0] + np.concatenate([[0.0], np.cumsum(step)])


def _phase_row(args):
    spec, k, route = args
    return phase_shift_value(spec, k, route)


def phase_shift_curve(spec: PotentialSpec, k_grid, route: str = "auto", mapper=map) -> PhaseShiftCurve:
    """Phase shift on ``k_grid`` (decreasing), unwrapped from the first point.

    ``mapper`` may be a parallel ``map``; each ``k`` is independent.
    """
    ks = np.asarray(k_grid, dtype=float)
    if ks.ndim != 1 or ks.size < 2 or np.any(ks <= 0) or np.any(np.diff(ks) >= 0):
        raise ValueError("k_grid must be a decreasing sequence of positive numbers")
    sigma = spec.sector.sigma
    if sigma:
        step = float(np.max(-np.diff(np.log(ks))))
        if step > (math.pi / sigma) / PER_PERIOD_MIN:
            raise UndersamplingError(
                f"log step {step:.4g} exceeds (pi/sigma)/{PER_PERIOD_MIN} = {math.pi / sigma / PER_PERIOD_MIN:.4g}")
    rows = list(mapper(_phase_row, [(spec, float(k), route) for k in ks]))
    raw = np.array([r.value for r in rows])
    return PhaseShiftCurve(
        k_grid=ks,
        sigma_sr=unwrap_phase(raw),
        anchor_k=float(ks[0]),
        anchor_value=float(raw[0]),
        errors=np.array([r.error for r in rows]),
    )


def trend_and_period(x, y, p_min: float, p_max: float, harmonics: int = 4):
    """Linear slope of ``y(x)`` under a periodic ripple, and the ripple period.

    The period is found by :func:`critscat.greens.detect_period` with a
    linear trend; the slope is the trend coefficient of the final fit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    period = detect_period(x, y, p_min, p_max, harmonics=harmonics, trend=True)
    A = np.column_stack([_harmonic_design(x, period, harmonics), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[-1]), period


def threshold_slope(curve: PhaseShiftCurve, harmonics: int = 4):
    """Slope of ``sigma_sr`` against ``-ln k`` and the log-period of the ripple.

    The search window for the period is centred on ``pi / s0`` where
    ``s0`` is the plain least-squares slope; it excludes twice the period,
    whose harmonics would fit equally well.
    """
    x = -curve.ln_k
    s0 = float(np.polyfit(x, curve.sigma_sr, 1)[0])
    if not s0 > 0:
        raise FitDegenerateError(f"phase shift does not grow as k -> 0 (slope {s0:.3g})")
    p0 = math.pi / s0
    return trend_and_period(x, curve.sigma_sr, 0.6 * p0, 1.6 * p0, harmonics)


# -- threshold fit ------------------------------------------------------------------


@dataclass
class AsymptoticFit:
    C1: float
    C2: float
    residual_trace: np.ndarray
    k_grid: np.ndarray
    sigma: float

    def to_dict(self) -> dict:
        return {
            "C1": self.C1,
            "C2": self.C2,
            "sigma": self.sigma,
            "k_grid": self.k_grid.tolist(),
            "residual_trace": self.residual_trace.tolist(),
        }


def predicted_phase(k, sigma: float, c1: float, c2: float):
    """Threshold form ``C2 - sigma ln k + sigma_per(sigma ln k + C1)``."""
    t = sigma * np.log(np.asarray(k, dtype=float))
    return c2 - t + specfun.sigma_per(sigma, t + c1)


def fit_threshold_asymptotics(curve: PhaseShiftCurve, sigma: float,
                              k_max: float | None = None) -> AsymptoticFit:
    """Least-squares ``(C1, C2)`` for the threshold form on ``k <= k_max``.

    ``C2`` is eliminated as the mean misfit for each ``C1``.  ``C1`` is
    scanned at 64 points of ``[0, 2 pi)``, refined by golden section and
    polished jointly with ``C2`` by Gauss-Newton.  Because ``sigma_per`` has
    period ``pi``, ``C1`` and ``C1 + pi`` fit equally well; ties go to the
    smaller value, so ``C1`` lands in ``[0, pi)``.  ``C2`` is reported
    modulo ``2 pi``.

    Raises
    ------
    FitDegenerateError
        If the misfit does not depend on ``C1`` (vanishing ripple).
    """
    mask = np.ones(curve.k_grid.size, bool) if k_max is None else curve.k_grid <= k_max
    ks = curve.k_grid[mask]
    if ks.size < 4:
        raise ValueError("need at least four points in the fit window")
    t = sigma * np.log(ks)
    y = curve.sigma_sr[mask] + t

    def misfit(c1):
        r = y - specfun.sigma_per(sigma, t + c1)
        return r - r.mean()

    def rss(c1):
        return float(np.sum(misfit(c1) ** 2))

    grid = np.arange(C1_SCAN) * (_TWO_PI / C1_SCAN)
    vals = np.array([rss(c) for c in grid])
    scale = float(np.sum((y - y.mean()) ** 2)) + 1e-300
    if vals.max() - vals.min() <= 1e-12 * max(scale, vals.max()):
        raise FitDegenerateError("residual is flat in C1; the log-periodic ripple is not resolved")
    order = np.lexsort((grid, np.round(vals / (vals.max() + 1e-300), 12)))
    i = int(order[0])
    h = _TWO_PI / C1_SCAN
    c1 = minimize_scalar(rss, bracket=(grid[i] - h, grid[i], grid[i] + h), method="golden",
                         options={"xtol": 1e-12}).x
    c2 = float(np.mean(y - specfun.sigma_per(sigma, t + c1)))
    sol = least_squares(lambda p: y - specfun.sigma_per(sigma, t + p[0]) - p[1], [c1, c2],
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
    c1, c2 = sol.x
    c1 = c1 % math.pi
    residual = y - specfun.sigma_per(sigma, t + c1) - c2
    return AsymptoticFit(C1=float(c1), C2=float(c2 % _TWO_PI), residual_trace=residual,
                         k_grid=ks.copy(), sigma=float(sigma))


# -- constants from the zero-energy solution ---------------------------------------------


@dataclass(frozen=True)
class TheoreticalConstants:
    theta0: float
    C1: float
    C2: float
    D: complex
    error: float


def d_at_radius(spec: PotentialSpec, R: float, conjugate: bool = False, r0: float = 1e-3) -> complex:
    """``D(R) = 2^nu R^(1/2-nu) / Gamma(1-nu) * ((1/2-nu) u(R)/R - u'(R))``.

    ``u`` is the real zero-energy regular solution with the same
    normalisation at the origin as the positive-energy ones.  With
    ``conjugate`` the formula is evaluated at ``conj(nu)``, which gives
    ``conj(D)`` for real ``u``.
    """
    nu = spec.sector.nu
    if conjugate:
        nu = nu.conjugate()
    sol = regular_solution(spec, 0.0, R, r0=r0)
    u, du = sol(np.array([R]))
    u, du = float(u[0].real), float(du[0].real)
    return complex(2**nu * R ** (0.5 - nu) / specfun.complex_gamma(1 - nu) * ((0.5 - nu) * u / R - du))


def theoretical_constants(spec: PotentialSpec, r0: float = 1e-3) -> TheoreticalConstants:
    """``theta0 = arg D`` and the threshold constants ``C1 = theta0``, ``C2 = 3 pi/4 - theta0``.

    Beyond the support ``u = a+ r^(1/2+nu) + a- r^(1/2-nu)`` and
    ``D(R) = -2^(nu+1) nu a+ / Gamma(1-nu)`` for every such ``R``.  This
    form also serves tails, with ``a+`` extrapolated to infinity and its
    error carried into ``error`` (an angle).  Both constants are modulo
    ``2 pi``; the offset ``3 pi/4`` is what the Hankel asymptotics give
    for ``C > 0`` in ``C sin(kr + sigma_sr)``.

    Raises
    ------
    DNearZeroError
        If ``|D|`` is below ``1e-10`` relative to the coefficient scale.
    """
    nu = spec.sector.nu
    coef = asymptotic_coefficients(spec, BasisKind.POWER, 0.0, r0=r0)
    scale = abs(coef.a_plus) + abs(coef.a_minus)
    if abs(coef.a_plus) <= D_FLOOR * scale:
        raise DNearZeroError("D vanishes: the zero-energy solution is purely r^(1/2-nu)")
    D = complex(-(2 ** (nu + 1)) * nu * coef.a_plus / specfun.complex_gamma(1 - nu))
    theta0 = math.atan2(D.imag, D.real) % _TWO_PI
    err = coef.error / abs(coef.a_plus)
    return TheoreticalConstants(theta0=theta0, C1=theta0, C2=(0.75 * math.pi - theta0) % _TWO_PI,
                                D=D, error=err)


# -- physical phase shift and the semiclassical integral ----------------------------------


def physical_offset(d: int, l: int) -> float:
    """``(d - 3 + 2 l) pi / 4``."""
    return (d - 3 + 2 * l) * math.pi / 4


def physical_phase_shift(d: int, l: int, gamma: float, lam: float, w2=None) -> float:
    """Phase shift of the ``l``-th partial wave in ``d`` dimensions at energy ``lam``.

    The reduced problem is the sector potential for ``-gamma/r^2`` (beyond
    ``r = 1``) plus ``w2``; its phase at ``k = sqrt(lam)`` is shifted by
    :func:`physical_offset`.  Returned modulo ``2 pi``.
    """
    if not lam > 0:
        raise ValueError(f"energy must be positive, got {lam}")
    spec = assemble_sector_potential(d, l, gamma, w2)
    return (phase_shift(spec, math.sqrt(lam)) + physical_offset(d, l)) % _TWO_PI


def wkb_phase_integral(gamma: float, lam: float, r0: float, mu: float,
                       split: float | None = None, terms: int = 40) -> float:
    """``int_{r0}^inf (sqrt(lam) - sqrt(lam - W(r))) dr`` for ``W = -gamma r^-mu``.

    Adaptive quadrature in ``ln r`` up to ``split`` (by default where
    ``gamma r^-mu = lam / 100``), then the binomial series of the square
    root integrated term by term.

    Raises
    ------
    DivergentIntegrandError
        If ``mu <= 1``.
    """
    if not mu > 1:
        raise DivergentIntegrandError(f"integrand decays like r^-{mu}; need mu > 1")
    if not (lam > 0 and r0 > 0):
        raise ValueError("need lam > 0 and r0 > 0")
    sl = math.sqrt(lam)
    if split is None:
        split = (100.0 * gamma / lam) ** (1.0 / mu)
    split = max(split, r0)

    def f(t):
        r = math.exp(t)
        x = gamma * r**-mu
        return -x / (sl + math.sqrt(lam + x)) * r

    head = 0.0
    if split > r0:
        head, _ = sp_integrate.quad(f, math.log(r0), math.log(split), epsabs=0.0, epsrel=1e-13, limit=400)
    n = np.arange(1, terms + 1)
    x_split = gamma * split**-mu / lam
    if x_split >= 1:
        raise ValueError("series split must lie where gamma r^-mu < lam")
    tail = -sl * np.sum(binom(0.5, n) * x_split**n * split / (n * mu - 1))
    return float(head + tail)
