"""
Radial Schrodinger equation ``-u'' + (V_inf + V) u = k**2 u``.

Integration runs in ``t = ln r`` with state ``(u, r u')``; this turns the
``1/r**2`` head into a constant coefficient, so one step size serves every
decade near the origin.  Solutions are matched to reference bases through
the variation-of-parameters coefficients ``a+-(r)`` defined by

    u  = a+ phi+  + a- phi-
    u' = a+ phi+' + a- phi-'
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from . import specfun
from .potentials import LocalSingularity, PotentialSpec, Zero, CompactSupport, PowerTail

RTOL = 1e-11
POINTS_PER_DECADE = 32
BLOWUP = 1e300


class IntegrationError(RuntimeError):
    """Step-size underflow or blowup during integration."""


class ExponentAmbiguityError(ValueError):
    """Local head does not have an admitted Frobenius form."""


class BasisDegenerateError(ValueError):
    pass


class NonConvergenceError(RuntimeError):
    pass


class BasisKind(str, enum.Enum):
    POWER = "power"
    TRIG = "trig"
    HANKEL = "hankel"


def wronskian(f, df, g, dg):
    """``W(f, g) = f g' - f' g``."""
    return f * dg - df * g


# -- solutions --------------------------------------------------------------


@dataclass
class RadialSolution:
    k2: complex
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    basis_meta: dict | None = None
    _dense: object = field(default=None, repr=False, compare=False)

    def __call__(self, r):
        """Dense-output values ``(u, u')`` anywhere inside the integrated range."""
        if self._dense is None:
            raise ValueError("solution has no dense output")
        r = np.asarray(r, dtype=float)
        y = self._dense(np.log(r))
        return y[0], y[1] / r

    def wronskian_with(self, other: "RadialSolution") -> np.ndarray:
        if not np.allclose(self.r, other.r, rtol=1e-14, atol=0):
            raise ValueError("solutions live on different grids")
        return wronskian(self.u, self.du, other.u, other.du)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.r, self.u.real, self.u.imag, self.du.real, self.du.imag])
        np.savetxt(Path(path), data, delimiter=",", header="r,re_u,im_u,re_du,im_du",
                   comments="", fmt="%.17g")


def reporting_grid(r_from: float, r_to: float, per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    lo, hi = sorted((r_from, r_to))
    n = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    grid = np.logspace(math.log10(lo), math.log10(hi), n)
    grid[0], grid[-1] = lo, hi
    return grid if r_from < r_to else grid[::-1]


def integrate(spec: PotentialSpec, k2: complex, r_from: float, r_to: float, init,
              grid: np.ndarray | None = None, rtol: float = RTOL) -> RadialSolution:
    """Integrate from ``r_from`` to ``r_to`` (either direction).

    Parameters
    ----------
    init : (u, u') at ``r_from``.
    grid : reporting radii; defaults to 32 log-spaced points per decade.
        Always returned in increasing order.
    """
    if not (r_from > 0 and r_to > 0) or r_from == r_to:
        raise ValueError("need distinct positive endpoints")
    u0, du0 = complex(init[0]), complex(init[1])
    if not (np.isfinite(u0) and np.isfinite(du0)):
        raise ValueError("initial data must be finite")
    k2 = complex(k2)
    if grid is None:
        grid = reporting_grid(r_from, r_to)
    grid = np.asarray(grid, dtype=float)
    t_eval = np.sort(np.log(grid))
    if r_from > r_to:
        t_eval = t_eval[::-1]

    def rhs(t, y):
        r = math.exp(t)
        q = r * r * (spec.scalar(r) - k2)
        return np.array([y[1], y[1] + q * y[0]])

    def blowup(t, y):
        return BLOWUP - abs(y[0])

    blowup.terminal = True
    scale = max(abs(u0), abs(r_from * du0))
    sol = solve_ivp(rhs, (math.log(r_from), math.log(r_to)), np.array([u0, r_from * du0]),
                    method="DOP853", rtol=rtol, atol=1e-30 * scale, t_eval=t_eval,
                    dense_output=True, events=blowup)
    if sol.status == 1:
        raise IntegrationError(f"solution exceeded {BLOWUP:g} near r = {math.exp(sol.t_events[0][0]):.6g}")
    if sol.status != 0:
        raise IntegrationError(sol.message)
    order = np.argsort(sol.t)
    r = np.exp(sol.t[order])
    y = sol.y[:, order]
    return RadialSolution(k2, r, y[0], y[1] / r, _dense=sol.sol)


# -- start data near the origin -----------------------------------------------


def _local_head(spec: PotentialSpec):
    """``(beta, eps)`` of the exactly-known head ``beta r^(eps-2)`` on ``r <= 1/2``."""
    w2 = spec.w2
    if isinstance(w2, (Zero, CompactSupport, PowerTail)):
        return 0.0, 1.0
    if isinstance(w2, LocalSingularity):
        if not w2.eps > 0:
            raise ExponentAmbiguityError(
                f"head r^{w2.eps - 2:g} is at least as singular as 1/r^2; exponents are not those of kappa")
        return w2.amplitude, w2.eps
    raise ExponentAmbiguityError(f"unsupported short-range form {type(w2).__name__}")


def frobenius_start(spec: PotentialSpec, r0: float = 1e-3, k2: complex = 0.0):
    """Regular-solution data ``(u, u')`` at ``r0``.

    Uses the convergent series ``u = r^(1/2+kappa) sum c_ab r^(a eps + 2 b)``
    with ``c_ab s (s + 2 kappa) = beta c_(a-1)b - k2 c_a(b-1)`` and
    ``s = a eps + 2 b``, which is exact where the local model holds.  For
    ``(d, l) = (2, 0)`` the exponent is ``1/2`` (``kappa = 0``).
    """
    if not 0 < r0 <= 0.5:
        raise ValueError("Frobenius start needs 0 < r0 <= 1/2")
    beta, eps = _local_head(spec)
    kappa = spec.local_kappa
    k2 = complex(k2)
    na = 80 if beta != 0 else 1
    nb = 60
    c = np.zeros((na, nb), dtype=complex)
    s = eps * np.arange(na)[:, None] + 2.0 * np.arange(nb)[None, :]
    c[0, 0] = 1.0
    for a in range(na):
        for b in range(nb):
            if a == 0 and b == 0:
                continue
            acc = 0j
            if a > 0:
                acc += beta * c[a - 1, b]
            if b > 0:
                acc -= k2 * c[a, b - 1]
            c[a, b] = acc / (s[a, b] * (s[a, b] + 2 * kappa))
    p = 0.5 + kappa + s
    terms = c * r0**s
    tail = np.abs(terms[:, -1]).max() + (np.abs(terms[-1, :]).max() if na > 1 else 0.0)
    if tail > 1e-16 * abs(terms.sum()):
        raise ValueError(f"Frobenius series not converged at r0 = {r0}; use a smaller start")
    lead = r0 ** (0.5 + kappa)
    u = lead * terms.sum()
    du = lead * (terms * p).sum() / r0
    return complex(u), complex(du)


def regular_solution(spec: PotentialSpec, k2: complex, r_to: float, r0: float = 1e-3,
                     grid: np.ndarray | None = None) -> RadialSolution:
    """Solution that is regular at the origin, integrated out to ``r_to``."""
    init = frobenius_start(spec, r0, k2)
    sol = integrate(spec, k2, r0, r_to, init, grid=grid)
    sol.basis_meta = {"kind": "regular", "r0": r0}
    return sol


# -- reference bases ------------------------------------------------------------


def basis_functions(kind: BasisKind | str, nu: complex, k: complex, r):
    """``(phi+, phi+', phi-, phi-', W(phi-, phi+))`` on ``r``.

    power  : ``r^(1/2 +- nu)`` (zero energy), ``W = 2 nu``
    trig   : ``cos kr``, ``sin kr``, ``W = -k``
    hankel : ``r^(1/2) H1_nu(kr)``, ``r^(1/2) H2_nu(kr)``, ``W = 4i/pi``
    """
    kind = BasisKind(kind)
    r = np.asarray(r, dtype=float)
    nu, k = complex(nu), complex(k)
    if kind is BasisKind.POWER:
        pp = r ** (0.5 + nu)
        pm = r ** (0.5 - nu)
        return pp, (0.5 + nu) * pp / r, pm, (0.5 - nu) * pm / r, 2 * nu
    if kind is BasisKind.TRIG:
        c, s = np.cos(k * r), np.sin(k * r)
        return c, -k * s, s, k * c, -k
    z = k * r
    h = specfun.hankel1(nu, z)
    dh = nu / z * h - specfun.hankel1(nu + 1, z)
    if k.imag == 0 and k.real > 0:
        # H2_nu(x) = conj(H1_conj(nu)(x)) for real x
        h2 = np.conj(specfun.hankel1(np.conj(nu), z))
        h2n = np.conj(specfun.hankel1(np.conj(nu) + 1, z))
        dh2 = nu / z * h2 - h2n
    else:
        j = specfun.bessel_j(nu, z)
        dj = nu / z * j - specfun.bessel_j(nu + 1, z)
        h2, dh2 = 2 * j - h, 2 * dj - dh
    sq = np.sqrt(r)
    pp = sq * h
    pm = sq * h2
    return pp, 0.5 * pp / r + sq * k * dh, pm, 0.5 * pm / r + sq * k * dh2, 4j / np.pi


def basis_potential(kind: BasisKind | str, nu: complex, r):
    """Potential solved exactly by the basis (``U = V_total - this``)."""
    kind = BasisKind(kind)
    r = np.asarray(r, dtype=float)
    if kind is BasisKind.TRIG:
        return np.zeros_like(r)
    return (complex(nu) ** 2 - 0.25) / r**2


@dataclass
class CoefficientTrace:
    basis: BasisKind
    k: complex
    nu: complex
    r: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray


def vp_flow(solution: RadialSolution, basis: BasisKind | str, k: complex,
            nu: complex | None = None, spec: PotentialSpec | None = None) -> CoefficientTrace:
    """Connection coefficients ``a+-(r)`` of ``solution`` at every grid point.

    ``a+ = W(phi-, u) / W(phi-, phi+)`` and ``a- = W(phi+, u) / W(phi+, phi-)``.
    """
    basis = BasisKind(basis)
    if nu is None:
        if spec is None:
            raise ValueError("need nu or spec")
        nu = spec.sector.nu
    r = solution.r
    pp, dpp, pm, dpm, w = basis_functions(basis, nu, k, r)
    w_num = wronskian(pm, dpm, pp, dpp)
    if abs(w) == 0 or np.any(np.abs(w_num) < 1e-12 * abs(w)):
        raise BasisDegenerateError(f"{basis.value} basis is degenerate at k = {k}")
    a_plus = wronskian(pm, dpm, solution.u, solution.du) / w
    a_minus = -wronskian(pp, dpp, solution.u, solution.du) / w
    return CoefficientTrace(basis, complex(k), complex(nu), r, a_plus, a_minus)


def flow_rhs(trace: CoefficientTrace, spec: PotentialSpec, k2: complex | None = None):
    """Right side of the coefficient flow, ``(a+', a-')`` on the trace grid.

    With ``U = V_total - V_basis``: ``a+' = phi- U u / W`` and
    ``a-' = -phi+ U u / W`` where ``W = W(phi-, phi+)``.
    """
    r = trace.r
    k2 = trace.k**2 if k2 is None else complex(k2)
    pp, _, pm, _, w = basis_functions(trace.basis, trace.nu, trace.k, r)
    u = trace.a_plus * pp + trace.a_minus * pm
    U = spec(r) - basis_potential(trace.basis, trace.nu, r)
    if trace.basis is BasisKind.POWER:
        U = U - k2
    return pm * U * u / w, -pp * U * u / w


@dataclass
class AsymptoticCoefficients:
    a_plus: complex
    a_minus: complex
    error: float
    radii: tuple


def _remainder_columns(basis: BasisKind, nu: complex, k: complex, eps: float, r, order: int):
    """Columns ``r^(-j p) * osc`` modelling ``a(inf) - a(r)`` for ``j <= order``."""
    # Hankel functions look like powers while k r stays small
    power_like = basis is BasisKind.POWER or (
        basis is BasisKind.HANKEL and abs(k) * float(np.min(r)) < 1.0)
    if power_like:
        p = eps
        osc = [np.ones_like(r)]
        if nu.real == 0:
            osc += [r ** (2 * nu), r ** (-2 * nu)]
    else:
        p = 1.0 + eps if basis is BasisKind.HANKEL else 1.0
        osc = [np.ones_like(r), np.exp(2j * k * r), np.exp(-2j * k * r)]
    cols = [np.ones_like(r, dtype=complex)]
    for j in range(1, order + 1):
        cols += [r ** (-j * p) * o for o in osc]
    return np.column_stack(cols)


def _fit_limit(a, basis, nu, k, eps, radii, order):
    A = _remainder_columns(basis, nu, k, eps, radii, order)
    scale = np.abs(A).max(axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, a, rcond=None)
    return complex(coef[0])


def asymptotic_coefficients(spec: PotentialSpec, basis: BasisKind | str, k: complex,
                            solution: RadialSolution | None = None, r_max: float = 1e4,
                            r0: float = 1e-3, samples: int = 24) -> AsymptoticCoefficients:
    """Limits ``a+-(inf)``.

    For compactly supported ``W2`` and the power or Hankel basis this is the
    value at the support radius.
    For a tail ``O(r^-eps)`` the trace is sampled on ``[r_max/16, r_max]`` and
    the remainder is removed by least squares in ``r^(-j eps)`` times the
    oscillating factors of the basis (``r^(+-2 nu)`` for powers, ``e^(+-2ikr)``
    otherwise), the two-point Richardson step generalised to oscillating
    remainders.  The reported error is the change between first- and
    second-order remainder models.
    """
    basis = BasisKind(basis)
    k = complex(k)
    nu = spec.sector.nu
    k2 = 0.0 if basis is BasisKind.POWER else k * k
    # the trig basis still sees the 1/r^2 tail beyond the support
    support = None if basis is BasisKind.TRIG else spec.support_radius
    if support is not None:
        radii = np.array([max(support, 2.0)])
    else:
        radii = np.geomspace(r_max / 16, r_max, samples)
    if solution is None:
        solution = regular_solution(spec, k2, radii[-1], r0=r0)
    u, du = solution(radii)
    pp, dpp, pm, dpm, w = basis_functions(basis, nu, k, radii)
    ap = wronskian(pm, dpm, u, du) / w
    am = -wronskian(pp, dpp, u, du) / w
    if support is not None:
        return AsymptoticCoefficients(complex(ap[0]), complex(am[0]), 0.0, tuple(radii))
    eps = getattr(spec.w2, "eps", 1.0)
    half = samples // 2
    dev = np.abs(ap - ap[-1]) + np.abs(am - am[-1])
    d1, d2 = dev[:half].max(), dev[half:].max()
    if d2 > d1 and d2 > 1e-9 * (abs(ap[-1]) + abs(am[-1])):
        raise NonConvergenceError("coefficient trace does not contract toward infinity")
    p1 = _fit_limit(ap, basis, nu, k, eps, radii, 1)
    m1 = _fit_limit(am, basis, nu, k, eps, radii, 1)
    p2 = _fit_limit(ap, basis, nu, k, eps, radii, 2)
    m2 = _fit_limit(am, basis, nu, k, eps, radii, 2)
    err = float(abs(p2 - p1) + abs(m2 - m1))
    return AsymptoticCoefficients(p2, m2, err, tuple(radii))
