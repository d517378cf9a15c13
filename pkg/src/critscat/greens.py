"""
Green's function of the full radial operator and its low-energy structure.

``G_k(r, r') = u_reg(r_<) u_out(r_>) / W(u_out, u_reg)`` is built from the
solution regular at the origin and the outgoing solution (proportional to
``r^(1/2) H1_nu(kr)`` at large ``r``).  In an oscillatory sector the
low-energy resolvent behaves as

    G_k(r, r') ~ B(r, r') + f(k^(2 nu)) u(r) u(r'),   f(w) = c1 w / (1 + b w),

with ``u`` the real zero-energy regular solution; ``f`` never settles as
``k -> 0`` because ``|k^(2 nu)| = 1`` on the real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import least_squares, minimize_scalar

from . import specfun
from .potentials import PotentialSpec
from .radial_ode import (
    BasisKind,
    RadialSolution,
    asymptotic_coefficients,
    integrate,
    regular_solution,
    wronskian,
)
from .specfun import BranchedWavenumber, branch_power

DEFAULT_PROBES = tuple((r, rp) for r in (1.5, 3.0, 6.0) for rp in (2.0, 5.0))
R_START_CAP = 1e4


class NearEigenvalueError(ArithmeticError):
    """Wronskian of the regular and outgoing solutions (nearly) vanishes."""


class FitDegenerateError(RuntimeError):
    pass


# -- solutions ------------------------------------------------------------------


def regular_zero_solution(spec: PotentialSpec, r_max: float = 100.0, r0: float = 1e-3) -> RadialSolution:
    """Real zero-energy regular solution with ``|a+(inf)|^2 + |a-(inf)|^2 = 1``.

    ``a+-`` are the coefficients on ``r^(1/2 +- nu)``.
    """
    support = spec.support_radius
    reach = max(r_max, support or 0.0)
    sol = regular_solution(spec, 0.0, reach, r0=r0)
    if support is not None:
        coef = asymptotic_coefficients(spec, BasisKind.POWER, 0.0, solution=sol)
    else:
        coef = asymptotic_coefficients(spec, BasisKind.POWER, 0.0, r0=r0)
    norm = math.sqrt(abs(coef.a_plus) ** 2 + abs(coef.a_minus) ** 2)
    sol.u = (sol.u / norm).real
    sol.du = (sol.du / norm).real
    dense = sol._dense
    sol._dense = (lambda t, d=dense, n=norm: d(t) / n)
    sol.basis_meta = {"kind": "regular_zero", "r0": r0, "normalization": norm}
    return sol


def start_radius(spec: PotentialSpec, cap: float = R_START_CAP) -> float:
    """Radius beyond which ``V`` is negligible against ``V_inf``.

    Exact (the support radius) for compact perturbations; for a tail
    ``beta r^(-2-eps)`` the point where it drops below ``1e-12 |V_inf|``,
    capped at ``cap``.
    """
    support = spec.support_radius
    if support is not None:
        return support
    w2 = spec.w2
    v_inf = abs(spec.sector.nu_squared - 0.25)
    r = (abs(w2.amplitude) / (1e-12 * v_inf)) ** (1.0 / w2.eps)
    return float(min(max(r, 2.0), cap))


def _hankel_data(nu: complex, k: complex, r: float):
    z = k * r
    h = specfun.hankel1(nu, z)
    dh = nu / z * h - specfun.hankel1(nu + 1, z)
    return math.sqrt(r) * h, 0.5 * math.sqrt(r) * h / r + math.sqrt(r) * k * dh


def outgoing_solution(spec: PotentialSpec, k, r_min: float, r_start: float | None = None,
                      grid: np.ndarray | None = None) -> RadialSolution:
    """Outgoing solution integrated backward from ``r_start`` to ``r_min``.

    Seeded with ``r^(1/2) H1_nu(kr)`` data.  When those values underflow
    (large ``Im k * r_start``) only the logarithmic derivative is used and
    the solution is returned up to a constant factor.
    """
    k = BranchedWavenumber(k).k
    nu = spec.sector.nu
    r_start = start_radius(spec) if r_start is None else r_start
    r_start = max(r_start, r_min * 1.01)
    u0, du0 = _hankel_data(nu, k, r_start)
    scaled = False
    if not (np.isfinite(u0) and abs(u0) > 1e-250):
        # log-derivative of r^(1/2) H1_nu(kr) from its large-argument form
        u0, du0 = 1.0, 1j * k - (4 * nu * nu - 1) / (8j * k * r_start**2)
        scaled = True
    sol = integrate(spec, k * k, r_start, r_min, (u0, du0), grid=grid)
    sol.basis_meta = {"kind": "outgoing", "r_start": r_start, "scaled": scaled}
    return sol


# -- Green's function -------------------------------------------------------------


@dataclass
class GreenSample:
    k: complex
    probes: tuple
    values: np.ndarray
    wronskian: complex


@dataclass
class GreenPair:
    """Regular and outgoing solutions at one ``k`` with their Wronskian."""

    k: complex
    reg: RadialSolution
    out: RadialSolution
    w: complex

    def kernel(self, r, rp):
        r, rp = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rp, dtype=float))
        lo, hi = np.minimum(r, rp), np.maximum(r, rp)
        return self.reg(lo)[0] * self.out(hi)[0] / self.w


def green_pair(spec: PotentialSpec, k, r_lo: float, r_hi: float, r0: float = 1e-3,
               r_start: float | None = None, tol: float = 1e-12) -> GreenPair:
    """Solutions covering ``[r_lo, r_hi]`` and ``W(u_out, u_reg)``.

    Raises
    ------
    NearEigenvalueError
        If ``|W|`` is below ``tol`` times the natural scale of the solutions.
    """
    k = BranchedWavenumber(k).k
    r_start = start_radius(spec) if r_start is None else r_start
    r_start = max(r_start, r_hi)
    reg = regular_solution(spec, k * k, r_hi, r0=r0)
    out = outgoing_solution(spec, k, min(r_lo, r_hi), r_start=r_start)
    rm = r_hi
    u, du = reg(rm)
    v, dv = out(rm)
    w = complex(wronskian(v, dv, u, du))
    scale = abs(u * dv) + abs(du * v)
    if abs(w) <= tol * scale:
        raise NearEigenvalueError(f"|W| = {abs(w):.3g} at k = {k} (scale {scale:.3g})")
    return GreenPair(k, reg, out, w)


def green_kernel(spec: PotentialSpec, k, probes=DEFAULT_PROBES) -> GreenSample:
    """``G_k`` at the probe pairs ``(r, r')``."""
    probes = tuple((float(a), float(b)) for a, b in probes)
    rs = np.array(probes)
    pair = green_pair(spec, k, rs.min(), rs.max())
    vals = pair.kernel(rs[:, 0], rs[:, 1])
    return GreenSample(pair.k, probes, np.asarray(vals), pair.w)


# -- applying G to functions (Chebyshev panels) -----------------------------------


@dataclass
class PanelGrid:
    """Chebyshev-Lobatto nodes on consecutive panels of ``[a, b]``."""

    edges: np.ndarray
    order: int = 24
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        x = -np.cos(np.pi * np.arange(self.order + 1) / self.order)
        self._x = x
        lo, hi = self.edges[:-1, None], self.edges[1:, None]
        self.nodes = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)

    @property
    def flat(self) -> np.ndarray:
        return self.nodes.ravel()

    def _coef(self, f):
        return cheb.chebfit(self._x, f.reshape(self.nodes.shape).T, self.order)

    def cumulative(self, f) -> np.ndarray:
        """``int_a^x f`` at every node."""
        half = 0.5 * np.diff(self.edges)
        c = self._coef(np.asarray(f))
        ci = cheb.chebint(c, lbnd=-1)
        part = cheb.chebval(self._x, ci) * half[:, None]
        offset = np.concatenate([[0.0], np.cumsum(part[:, -1])[:-1]])
        return (part + offset[:, None]).ravel()

    def second_derivative(self, f) -> np.ndarray:
        half = 0.5 * np.diff(self.edges)
        c = self._coef(np.asarray(f))
        d2 = cheb.chebval(self._x, cheb.chebder(c, 2)) / half[:, None] ** 2
        return d2.ravel()


def panel_grid(a: float, b: float, panels: int = 40, order: int = 24) -> PanelGrid:
    return PanelGrid(np.geomspace(a, b, panels + 1), order)


def apply_green(pair: GreenPair, grid: PanelGrid, f_vals) -> np.ndarray:
    """``int G_k(x, y) f(y) dy`` over the panel range, at the panel nodes."""
    x = grid.flat
    u = pair.reg(x)[0]
    v = pair.out(x)[0]
    a = grid.cumulative(u * f_vals)
    b_cum = grid.cumulative(v * f_vals)
    b = b_cum[-1] - b_cum
    return (v * a + u * b) / pair.w


def operator_residual(spec: PotentialSpec, k, f, support: tuple[float, float],
                      panels: int = 80) -> float:
    """``max |(H - k^2) G_k f - f| / max |f|`` using spectral differentiation."""
    a, b = support
    lo, hi = max(a / 4, 1e-2), b * 2
    grid = panel_grid(lo, hi, panels)
    pair = green_pair(spec, k, lo, hi)
    x = grid.flat
    g = apply_green(pair, grid, f(x))
    k = pair.k
    hg = -grid.second_derivative(g) + (np.array([spec.scalar(t) for t in x]) - k * k) * g
    return float(np.max(np.abs(hg - f(x))) / np.max(np.abs(f(x))))


def resolvent_identity_residual(spec: PotentialSpec, k, kp, f, support: tuple[float, float],
                                r_max: float = 80.0, panels: int = 120) -> float:
    """Residual of ``G_k f - G_k' f = (k^2 - k'^2) G_k G_k' f`` (``Im k, Im k' > 0``)."""
    lo = 1e-3
    grid = panel_grid(lo, r_max, panels)
    pk = green_pair(spec, k, lo, r_max)
    pkp = green_pair(spec, kp, lo, r_max)
    fv = f(grid.flat)
    gk = apply_green(pk, grid, fv)
    gkp = apply_green(pkp, grid, fv)
    rhs = (pk.k**2 - pkp.k**2) * apply_green(pk, grid, gkp)
    sel = (grid.flat >= support[0] / 2) & (grid.flat <= 2 * support[1])
    return float(np.max(np.abs((gk - gkp) - rhs)[sel]) / np.max(np.abs(gk[sel])))


# -- oscillation fit --------------------------------------------------------------


@dataclass
class OscillationFit:
    probes: tuple
    sigma: float
    k: np.ndarray
    background: np.ndarray
    amplitudes: np.ndarray
    c1: complex
    b: complex
    u_samples: dict
    residual: float
    rank_one_defect: float
    factorization_defect: float
    b_dispersion: float

    def f(self, w):
        return self.c1 * w / (1 + self.b * w)

    def to_dict(self) -> dict:
        return {
            "probes": [list(p) for p in self.probes],
            "sigma": self.sigma,
            "c1": [self.c1.real, self.c1.imag],
            "b": [self.b.real, self.b.imag],
            "background": [[z.real, z.imag] for z in self.background],
            "u_samples": {repr(r): v for r, v in self.u_samples.items()},
            "residual": self.residual,
            "rank_one_defect": self.rank_one_defect,
            "factorization_defect": self.factorization_defect,
            "b_dispersion": self.b_dispersion,
        }


def _project(G, w, b):
    """Best ``(B_p, A_p)`` for fixed ``b`` and the resulting residual matrix."""
    basis = np.column_stack([np.ones_like(w), w / (1 + b * w)])
    coef, *_ = np.linalg.lstsq(basis, G, rcond=None)
    return coef, G - basis @ coef


def fit_moebius(G: np.ndarray, w: np.ndarray, b0: complex | None = None):
    """Fit ``G[:, p] = B_p + A_p w / (1 + b w)`` with ``b`` shared by all columns.

    Returns ``(B, A, b, relative_residual)``.  The starting ``b`` comes from
    the linearisation ``G = B + C w - b w G``; the refinement eliminates the
    linear parameters (variable projection) and solves for ``b`` alone.
    """
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    if G.shape[0] != len(w):
        G = G.T
    n, p = G.shape
    if b0 is None:
        rows = []
        rhs = []
        for j in range(p):
            blk = np.zeros((n, 2 * p + 1), dtype=complex)
            blk[:, 2 * j] = 1.0
            blk[:, 2 * j + 1] = w
            blk[:, -1] = -w * G[:, j]
            rows.append(blk)
            rhs.append(G[:, j])
        sol, *_ = np.linalg.lstsq(np.vstack(rows), np.concatenate(rhs), rcond=None)
        b0 = sol[-1]

    def res(x):
        _, r = _project(G, w, complex(x[0], x[1]))
        r = r.ravel()
        return np.concatenate([r.real, r.imag])

    opt = least_squares(res, [b0.real, b0.imag], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    b = complex(opt.x[0], opt.x[1])
    coef, r = _project(G, w, b)
    rel = float(np.linalg.norm(r) / np.linalg.norm(G))
    return coef[0], coef[1], b, rel


def green_trace(spec: PotentialSpec, ks, probes=DEFAULT_PROBES, mapper=map) -> np.ndarray:
    """``G_k`` at the probes for every ``k``; rows follow ``ks``."""
    probes = tuple(probes)
    rows = list(mapper(_green_row, [(spec, complex(k), probes) for k in ks]))
    return np.array(rows)


def _green_row(args):
    spec, k, probes = args
    return green_kernel(spec, k, probes).values


def default_k_grid(sigma: float, k_min: float = 2e-8, k_max: float = 1e-4, per_period: int = 24,
                   arg: float = 0.0) -> np.ndarray:
    """Log grid covering ``[k_min, k_max]`` with ``per_period`` points per ``pi/sigma``."""
    span = math.log(k_max / k_min)
    n = max(8, int(math.ceil(per_period * span / (math.pi / sigma))) + 1)
    return np.geomspace(k_max, k_min, n) * np.exp(1j * arg)


def extract_oscillation(spec: PotentialSpec, ks=None, probes=DEFAULT_PROBES, G=None,
                        mapper=map, noise_floor: float = 1e-12) -> OscillationFit:
    """Fit the oscillatory rank-one structure of ``G_k`` at small ``k``."""
    sector = spec.sector
    if not sector.oscillatory:
        raise ValueError("sector is not oscillatory")
    sigma = sector.sigma
    ks = default_k_grid(sigma) if ks is None else np.asarray(ks, dtype=complex)
    span = abs(math.log(abs(ks).max() / abs(ks).min()))
    if span < 2 * math.pi / sigma * 0.999:
        raise ValueError("k grid must span at least two periods pi/sigma in ln k")
    probes = tuple(probes)
    if G is None:
        G = green_trace(spec, ks, probes, mapper)
    w = branch_power(ks, 2 * sector.nu)
    amp = np.ptp(np.abs(G), axis=0)
    if np.all(amp < 10 * noise_floor * np.max(np.abs(G))):
        raise FitDegenerateError("oscillation amplitude is below the noise floor")
    B, A, b, rel = fit_moebius(G, w)
    # rank-one structure across the probe table
    rows = sorted({p[0] for p in probes})
    cols = sorted({p[1] for p in probes})
    index = {p: i for i, p in enumerate(probes)}
    table = np.full((len(rows), len(cols)), np.nan + 0j)
    for (a, c), i in index.items():
        table[rows.index(a), cols.index(c)] = A[i]
    minors = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            for m in range(len(cols)):
                for n in range(m + 1, len(cols)):
                    minors.append(table[i, m] * table[j, n] - table[i, n] * table[j, m])
    scale = np.nanmax(np.abs(table)) ** 2
    defect = float(np.nanmax(np.abs(minors)) / scale) if minors else 0.0
    # factorization against the zero-energy regular solution
    zero = regular_zero_solution(spec, r_max=max(max(rows), max(cols)) + 1.0)
    radii = sorted(set(rows) | set(cols))
    u = {r: float(zero(r)[0].real) for r in radii}
    ratios = np.array([A[index[p]] / (u[p[0]] * u[p[1]]) for p in probes])
    c1 = complex(np.mean(ratios))
    fdefect = float(np.max(np.abs(ratios - c1)) / abs(c1))
    # b from each probe on its own
    bs = np.array([fit_moebius(G[:, [j]], w, b0=b)[2] for j in range(len(probes))])
    disp = float(np.max(np.abs(bs - b)) / abs(b))
    return OscillationFit(probes, sigma, np.asarray(ks), B, A, c1, b, u, rel, defect, fdefect, disp)


# -- period detection ---------------------------------------------------------------


def _harmonic_design(x, period, harmonics):
    cols = [np.ones_like(x)]
    for h in range(1, harmonics + 1):
        ph = 2 * np.pi * h * x / period
        cols += [np.cos(ph), np.sin(ph)]
    return np.column_stack(cols)


def detect_period(x, y, p_min: float, p_max: float, harmonics: int = 4, scan: int = 400,
                  trend: bool = False) -> float:
    """Period of ``y(x)`` by least-squares harmonic fits with unknown period.

    Scans ``[p_min, p_max]`` and refines the best scan point by bounded
    Brent minimisation of the residual.  ``trend`` adds a linear term.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def rss(p):
        A = _harmonic_design(x, p, harmonics)
        if trend:
            A = np.column_stack([A, x])
        _, res, *_ = np.linalg.lstsq(A, y, rcond=None)
        if res.size == 0:
            res = [np.sum((A @ np.linalg.lstsq(A, y, rcond=None)[0] - y) ** 2)]
        return float(res[0])

    ps = np.geomspace(p_min, p_max, scan)
    vals = np.array([rss(p) for p in ps])
    i = int(np.argmin(vals))
    lo, hi = ps[max(i - 1, 0)], ps[min(i + 1, scan - 1)]
    opt = minimize_scalar(rss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * hi})
    return float(opt.x)


# -- spectral density ------------------------------------------------------------------


def spectral_density(spec: PotentialSpec, k: float, probes=DEFAULT_PROBES) -> np.ndarray:
    """``(R(k) - R(-k)) / (2 pi i)`` at the probes for real ``k > 0``.

    Uses ``R(-k) = R(k)^*``; with the symmetric kernel this is ``Im G / pi``.
    """
    if not (np.isreal(k) and float(np.real(k)) > 0):
        raise ValueError("spectral density needs real k > 0")
    g = green_kernel(spec, float(np.real(k)), probes)
    return (g.values - np.conj(g.values)) / (2j * np.pi)


@dataclass
class DensityOscillation:
    ln_k: np.ndarray
    density: np.ndarray
    period: float
    amplitudes: np.ndarray
    min_wronskian: float


def density_oscillation(spec: PotentialSpec, r: float = 3.0, k_max: float = 1e-2, periods: int = 4,
                        per_period: int = 32, mapper=map) -> DensityOscillation:
    """Diagonal spectral density over ``periods`` log-periods below ``k_max``.

    Reports the max-min amplitude in each period, the detected period and
    the smallest normalised Wronskian met along the way.
    """
    sigma = spec.sector.sigma
    p = math.pi / sigma
    n = periods * per_period + 1
    ln_k = math.log(k_max) - np.linspace(0, periods * p, n)
    args = [(spec, math.exp(t), r) for t in ln_k]
    out = list(mapper(_density_row, args))
    dens = np.array([o[0] for o in out])
    wr = np.array([o[1] for o in out])
    amps = np.array([np.ptp(dens[i * per_period:(i + 1) * per_period + 1]) for i in range(periods)])
    period = detect_period(ln_k, dens, 0.5 * p, 1.5 * p)
    return DensityOscillation(ln_k, dens, period, amps, float(wr.min()))


def _density_row(args):
    spec, k, r = args
    pair = green_pair(spec, k, r, r)
    dens = float(np.imag(pair.kernel(r, r)) / np.pi)
    u, du = pair.reg(r)
    v, dv = pair.out(r)
    scale = abs(u * dv) + abs(du * v)
    return dens, abs(pair.w) / scale
