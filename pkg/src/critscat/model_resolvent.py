"""
Exactly solvable model: ``H^D = -d^2/dr^2 + (nu^2 - 1/4)/r^2`` on ``[1, inf)``
with a Dirichlet condition at ``r = 1`` and ``nu = -i*sigma``.

Its resolvent kernel is ``R^D_k(r, r') = phi_{k^2}(r_<) phi+_k(r_>)`` where
``phi_{k^2}`` is the Dirichlet solution (``phi(1) = 0, phi'(1) = 1``) and
``phi+_k`` the outgoing solution normalised by ``phi+_k(1) = 1``.  As
``k -> 0``

    R^D_k = R^D_0 + zeta(k) |phi0><phi0| + small,

with ``zeta`` a Mobius function of ``k^(2 nu)`` that oscillates in ``ln k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .specfun import BranchedWavenumber, branch_power, complex_gamma

LADDER_MAX = 12


class DenominatorZeroError(ArithmeticError):
    """``H1_nu(k)`` vanishes: ``k`` is a Dirichlet eigen-wavenumber."""


class ExhaustedPrecisionError(ArithmeticError):
    pass


class TruncationWarning(RuntimeWarning):
    pass


def _nu(sigma: float) -> complex:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return complex(0.0, -sigma)


def _k(k) -> complex:
    return BranchedWavenumber(k).k


def d_nu(sigma: float) -> complex:
    """``D_nu = 2^(-nu) / Gamma(nu + 1)``; note ``conj(D_nu) = D_(-nu)``."""
    nu = _nu(sigma)
    return complex(2.0 ** (-nu) / complex_gamma(nu + 1))


# -- solutions ------------------------------------------------------------------


def phi0(r, sigma: float):
    """Zero-energy Dirichlet solution ``r^(1/2) sin(sigma ln r) / sigma``."""
    r = np.asarray(r, dtype=float)
    out = np.sqrt(r) * np.sin(sigma * np.log(r)) / sigma
    return float(out) if out.ndim == 0 else out


def phi0_prime(r, sigma: float):
    r = np.asarray(r, dtype=float)
    lr = sigma * np.log(r)
    out = (0.5 * np.sin(lr) / sigma + np.cos(lr)) / np.sqrt(r)
    return float(out) if out.ndim == 0 else out


def _as_out(out):
    return complex(out) if np.ndim(out) == 0 else out


def phi_k2(r, k, sigma: float, derivative: bool = False):
    """Dirichlet solution at energy ``k^2`` (``phi(1) = 0``, ``phi'(1) = 1``).

    ``pi / (2 sin(nu pi)) r^(1/2) (J_-nu(k) J_nu(kr) - J_nu(k) J_-nu(kr))``;
    the solution is even in ``k`` so it does not depend on the branch.
    With ``derivative=True`` returns ``(phi, phi')``.
    """
    nu = _nu(sigma)
    k = _k(k)
    r = np.asarray(r, dtype=float)
    z = k * r
    jp, jm = specfun.bessel_j(nu, z), specfun.bessel_j(-nu, z)
    a, b = specfun.bessel_j(-nu, k), specfun.bessel_j(nu, k)
    pref = np.pi / (2 * np.sin(nu * np.pi))
    sq = np.sqrt(r)
    phi = pref * sq * (a * jp - b * jm)
    if not derivative:
        return _as_out(phi)
    djp = nu / z * jp - specfun.bessel_j(nu + 1, z)
    djm = -nu / z * jm - specfun.bessel_j(-nu + 1, z)
    dphi = 0.5 * phi / r + pref * sq * k * (a * djp - b * djm)
    return _as_out(phi), _as_out(dphi)


def phi_plus(r, k, sigma: float, derivative: bool = False, flip_order: bool = False):
    """Outgoing solution ``r^(1/2) H1_nu(kr) / H1_nu(k)``.

    ``flip_order`` evaluates the same expression with ``-nu``; the result
    depends on ``nu**2`` only, which serves as a consistency check.
    """
    nu = _nu(sigma)
    if flip_order:
        nu = -nu
    k = _k(k)
    r = np.asarray(r, dtype=float)
    h1 = specfun.hankel1(nu, k)
    if abs(h1) < 1e-300:
        raise DenominatorZeroError(f"H1_nu({k}) = 0")
    z = k * r
    h = specfun.hankel1(nu, z)
    sq = np.sqrt(r)
    phi = sq * h / h1
    if not derivative:
        return _as_out(phi)
    dh = nu / z * h - specfun.hankel1(nu + 1, z)
    dphi = 0.5 * phi / r + sq * k * dh / h1
    return _as_out(phi), _as_out(dphi)


# -- zeta -----------------------------------------------------------------------


@dataclass(frozen=True)
class ZetaValue:
    k: complex
    value: complex
    d_nu: complex
    denominator: complex


def zeta(k, sigma: float) -> ZetaValue:
    """``2 i sigma e^(-sigma pi) D k^(2nu) / (conj(D) - D e^(-sigma pi) k^(2nu))``."""
    nu = _nu(sigma)
    k = _k(k)
    D = d_nu(sigma)
    x = math.exp(-sigma * math.pi) * D * branch_power(k, 2 * nu)
    den = D.conjugate() - x
    return ZetaValue(k, complex(2j * sigma * x / den), D, complex(den))


def zeta_values(k, sigma: float) -> np.ndarray:
    """Vectorised ``zeta`` over an array of wavenumbers."""
    nu = _nu(sigma)
    D = d_nu(sigma)
    x = math.exp(-sigma * math.pi) * D * branch_power(np.asarray(k, dtype=complex), 2 * nu)
    return 2j * sigma * x / (D.conjugate() - x)


def zeta_pole_ladder(sigma: float, n_max: int = LADDER_MAX) -> np.ndarray:
    """Poles ``k = i kappa`` of ``zeta`` continued to ``arg k = pi/2``.

    The denominator vanishes where ``kappa^(-2 i sigma) = conj(D)/D``,
    i.e. ``ln kappa = (arg D - n pi)/sigma``; returned in decreasing order
    starting with the largest ``kappa < 1``.
    """
    a = np.angle(d_nu(sigma))
    n0 = math.floor(a / math.pi) + 1
    n = n0 + np.arange(n_max)
    return np.exp((a - n * np.pi) / sigma)


# -- kernel ---------------------------------------------------------------------


@dataclass(frozen=True)
class ModelKernelSample:
    k: complex
    sigma: float
    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def weighted(self, s: float = 0.0) -> np.ndarray:
        """``w^(1/2) <r>^-s K <r'>^-s w'^(1/2)``."""
        g = np.sqrt(self.weights) * (1 + self.grid**2) ** (-s / 2)
        return g[:, None] * self.values * g[None, :]

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)) / np.max(np.abs(self.values)))

    def imag_form_min_eig(self) -> float:
        """Smallest eigenvalue of the weighted ``Im`` form, relative to its norm."""
        m = self.weighted().imag
        m = 0.5 * (m + m.T)
        ev = np.linalg.eigvalsh(m)
        return float(ev[0] / max(np.max(np.abs(ev)), 1e-300))


def log_grid(r_max: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-spaced points on ``[1, r_max]`` and trapezoid weights in ``r``."""
    r = np.geomspace(1.0, r_max, n)
    x = np.log(r)
    h = np.diff(x)
    w = np.zeros(n)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return r, w * r


def _kernel(phi, phip):
    """``K[i, j] = phi[min] * phip[max]`` from two vectors on a sorted grid."""
    n = len(phi)
    idx = np.arange(n)
    lo = np.minimum(idx[:, None], idx[None, :])
    hi = np.maximum(idx[:, None], idx[None, :])
    return phi[lo] * phip[hi]


def model_kernel(k, sigma: float, grid, weights=None) -> ModelKernelSample:
    """Sample ``R^D_k(r, r') = phi_{k^2}(r_<) phi+_k(r_>)`` on a sorted grid."""
    r = np.asarray(grid, dtype=float)
    if np.any(np.diff(r) <= 0) or r[0] < 1:
        raise ValueError("grid must be increasing and start at r >= 1")
    k = _k(k)
    if weights is None:
        weights = np.gradient(r)
    vals = _kernel(np.asarray(phi_k2(r, k, sigma)), np.asarray(phi_plus(r, k, sigma)))
    return ModelKernelSample(k, sigma, r, vals, np.asarray(weights, dtype=float))


def apply_kernel(k, sigma: float, f, r, support: tuple[float, float], nodes: int = 64):
    """``int R^D_k(r, r') f(r') dr'`` for ``f`` supported in ``support``.

    The integral is split at ``r`` and each piece done by Gauss-Legendre,
    so the kink of the kernel on the diagonal costs no accuracy.
    """
    k = _k(k)
    a, b = support
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape, dtype=complex)
    phi_r = np.asarray(phi_k2(r, k, sigma))
    plus_r = np.asarray(phi_plus(r, k, sigma))
    for i, ri in enumerate(r):
        lo_end = min(max(ri, a), b)
        acc = 0j
        if lo_end > a:
            t = 0.5 * (lo_end - a) * x + 0.5 * (lo_end + a)
            acc += plus_r[i] * 0.5 * (lo_end - a) * np.sum(w * phi_k2(t, k, sigma) * f(t))
        hi_start = max(min(ri, b), a)
        if b > hi_start:
            t = 0.5 * (b - hi_start) * x + 0.5 * (b + hi_start)
            acc += phi_r[i] * 0.5 * (b - hi_start) * np.sum(w * phi_plus(t, k, sigma) * f(t))
        out[i] = acc
    return out


def model_operator_residual(k, sigma: float, f, support: tuple[float, float],
                            r_max: float | None = None, n: int = 2000) -> float:
    """Max of ``|(H^D - k^2) R f - f|`` on a uniform grid, relative to ``max |f|``.

    The operator is discretised by the fourth-order five-point second
    difference on ``n`` points of ``[1, r_max]``.
    """
    a, b = support
    r_max = r_max if r_max is not None else b + 2.0
    r = np.linspace(1.0, r_max, n)
    h = r[1] - r[0]
    g = apply_kernel(k, sigma, f, r, support)
    d2 = (-g[:-4] + 16 * g[1:-3] - 30 * g[2:-2] + 16 * g[3:-1] - g[4:]) / (12 * h * h)
    ri = r[2:-2]
    k = _k(k)
    hg = -d2 + ((_nu(sigma) ** 2 - 0.25) / ri**2 - k * k) * g[2:-2]
    fv = f(ri)
    return float(np.max(np.abs(hg - fv)) / np.max(np.abs(fv)))


# -- small-k expansion ------------------------------------------------------------


def expansion_remainder(k, sigma: float, r):
    """``R^D_k - R^D_0 - zeta(k) T`` sampled on the product grid ``r x r``."""
    nu = _nu(sigma)
    k = _k(k)
    r = np.asarray(r, dtype=float)
    p0 = np.asarray(phi0(r, sigma), dtype=complex)
    rk = _kernel(np.asarray(phi_k2(r, k, sigma)), np.asarray(phi_plus(r, k, sigma)))
    r0 = _kernel(p0, r ** (0.5 - nu))
    return rk - r0 - zeta(k, sigma).value * np.outer(p0, p0)


def expansion_error(k, sigma: float, s: float = 2.0, s_prime: float = 1.5,
                    n: int = 400, r_max: float | None = None) -> float:
    """Weighted norm of the remainder of the small-``k`` kernel expansion.

    Largest singular value of ``w^(1/2) <r>^-s E <r'>^-s w'^(1/2)`` on a log
    grid over ``[1, 10/|k|]``.  The part beyond the grid decays like
    ``r_max^(1-s)``; it is estimated from the change against the block on
    ``[1, r_max/2]`` and a :class:`TruncationWarning` is issued when it
    exceeds 10% of the result.
    """
    if not (s > s_prime > 1 and s_prime <= 3):
        raise ValueError("need s > s' > 1 and s' <= 3")
    k = _k(k)
    r_max = 10.0 / abs(k) if r_max is None else r_max
    r, w = log_grid(r_max, n)
    g = np.sqrt(w) * (1 + r**2) ** (-s / 2)
    m = g[:, None] * expansion_remainder(k, sigma, r) * g[None, :]
    val = float(np.linalg.norm(m, 2))
    # the tail decays like r_max^(1-s); compare with the block on [1, r_max/2]
    half = r <= r_max / 2
    val_half = float(np.linalg.norm(m[np.ix_(half, half)], 2))
    tail = abs(val - val_half) / (2.0 ** (s - 1) - 1.0)
    if tail > 0.1 * val:
        warnings.warn(f"tail beyond r_max={r_max:.3g} may reach {tail:.3g} (result {val:.3g})",
                      TruncationWarning, stacklevel=2)
    return val


def expansion_scaling(sigma: float, ks, s: float = 2.0, s_prime: float = 1.5,
                      arg_k: float = math.pi / 4, n: int = 400):
    """Errors at ``|k|`` in ``ks`` along the ray ``arg k = arg_k`` and the log-log slope."""
    ks = np.asarray(ks, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        errs = np.array([expansion_error(kk * np.exp(1j * arg_k), sigma, s, s_prime, n) for kk in ks])
    slope = float(np.polyfit(np.log(ks), np.log(errs), 1)[0])
    return errs, slope


# -- Dirichlet ladder -------------------------------------------------------------


def dirichlet_ladder(sigma: float, n_max: int = LADDER_MAX, per_period: int = 64) -> np.ndarray:
    """Largest ``n_max`` zeros of ``x -> K_{i sigma}(x)``, decreasing.

    These are the ``kappa_n`` with ``H1_nu(i kappa_n) = 0``; the negative
    Dirichlet eigenvalues are ``-kappa_n**2``.  Roots are bracketed by a
    sign scan in ``ln x`` with ``per_period`` points per period ``pi/sigma``
    and polished by Brent's method.
    """
    if not 1 <= n_max <= LADDER_MAX:
        raise ValueError(f"n_max must be in [1, {LADDER_MAX}]")
    step = math.pi / sigma / per_period
    # K_{i sigma}(x) has no zeros for x > sigma
    t = math.log(sigma + 1.0)
    f = lambda lx: specfun.bessel_k_imag_order(sigma, math.exp(lx))  # noqa: E731
    roots = []
    ft = f(t)
    while len(roots) < n_max:
        t_next = t - step
        if t_next < math.log(1e-300):
            raise ExhaustedPrecisionError(f"only {len(roots)} zeros above 1e-300 for sigma={sigma}")
        fn = f(t_next)
        if ft == 0.0:
            roots.append(math.exp(t))
        elif ft * fn < 0:
            lx = brentq(f, t_next, t, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            roots.append(math.exp(lx))
        t, ft = t_next, fn
    return np.array(roots)
