"""
Numerical acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult` with the measured numbers,
so the same code drives the ``verify`` subcommand and the test suite.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import greens, model_resolvent as mr, potentials, radial_ode, scattering, sectors, specfun

SIGMAS = (0.5, 1.0, 2.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.title}"


def _gamma_for(sigma: float, d: int = 3, l: int = 0) -> float:
    return (l + d / 2 - 1) ** 2 + sigma**2


def _bump(a: float, b: float):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def f(r):
        x = (np.asarray(r, dtype=float) - mid) / half
        out = np.zeros_like(x)
        inside = np.abs(x) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        return out

    return f


# -- 1 ------------------------------------------------------------------------------


SIGMA_PER_AT_QUARTER_PI = -0.04318704852478214  # sigma = 1, t = pi/4; independent arg computation


def periodic_phase(sigma_values=SIGMAS, points: int = 10_000) -> CriterionResult:
    t = np.linspace(-4 * math.pi, 4 * math.pi, points)
    rel, per, zero = 0.0, 0.0, 0.0
    for s in sigma_values:
        sp = specfun.sigma_per(s, t)
        curve = specfun.sigma_per_curve(s, t)
        rel = max(rel, float(np.max(np.abs(curve - np.abs(curve) * np.exp(1j * (sp - t))))))
        per = max(per, float(np.max(np.abs(specfun.sigma_per(s, t + 2 * math.pi) - sp))))
        zero = max(zero, abs(specfun.sigma_per(s, 0.0)))
    quarter = specfun.sigma_per(1.0, math.pi / 4)
    ok = (rel < 1e-12 and per < 1e-12 and zero == 0.0
          and abs(quarter - SIGMA_PER_AT_QUARTER_PI) < 1e-12 and round(quarter, 3) == -0.043)
    return CriterionResult(1, "periodic phase function", ok, {
        "relation_residual": rel, "periodicity": per, "value_at_zero": zero,
        "value_sigma1_quarter_pi": quarter})


# -- 2 ------------------------------------------------------------------------------


def bessel_residual(sigma: float, z: complex, h: float | None = None) -> float:
    """Five-point residual of ``u'' + (1 - (nu^2 - 1/4)/z^2) u = 0`` for ``u = z^(1/2) J_nu(z)``.

    Scaled by the local envelope ``sqrt(|u|^2 + |u'|^2)`` so that zeros of
    ``u`` do not inflate it.  The step balances the ``h^4`` truncation
    against rounding noise amplified by ``1/h^2``.
    """
    h = 5e-3 * min(1.0, abs(z)) if h is None else h
    nu = complex(0.0, -sigma)
    zs = z + h * np.arange(-2, 3)
    u = np.sqrt(zs) * specfun.bessel_j(nu, zs)
    d2 = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h)
    res = d2 + (1 - (nu * nu - 0.25) / z**2) * u[2]
    du = (u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * h)
    envelope = math.hypot(abs(u[2]), abs(du))
    return float(abs(res) / (envelope * (1 + abs((nu * nu - 0.25) / z**2))))


def special_functions(sigma_values=SIGMAS) -> CriterionResult:
    zs = [0.5, 2.0, 7.5, 15.0, 30.0, 3 + 2j, 10 + 5j, -4 + 1j, -20 + 0.5j]
    ode = conn = sym = wr = 0.0
    for s in sigma_values:
        nu = complex(0.0, -s)
        for z in zs:
            ode = max(ode, bessel_residual(s, z))
            h = specfun.hankel1(nu, z)
            jm, jp = specfun.bessel_j(-nu, z), specfun.bessel_j(nu, z)
            h_conn = (jm - np.exp(-1j * nu * np.pi) * jp) / (1j * np.sin(nu * np.pi))
            # relative to the size of the two terms, which cancel where Im z is large
            terms = (abs(jm) + abs(np.exp(-1j * nu * np.pi) * jp)) / abs(np.sin(nu * np.pi))
            conn = max(conn, abs(h - h_conn) / max(abs(h), terms))
            sym = max(sym, abs(h - np.exp(-1j * nu * np.pi) * specfun.hankel1(-nu, z)) / abs(h))
        r = np.array([0.7, 1.0, 4.0, 25.0])
        pp, dpp, pm, dpm, _ = radial_ode.basis_functions("hankel", nu, 0.8, r)
        wr = max(wr, float(np.max(np.abs(radial_ode.wronskian(pm, dpm, pp, dpp) - 4j / np.pi))))
    # lower bound on the sector |arg k| <= theta, |k| <= eps
    theta, eps = math.pi / 4, 0.1
    margin = np.inf
    for s in sigma_values:
        nu = complex(0.0, -s)
        c_nu = abs(specfun.complex_gamma(nu + 1) * np.sin(nu * np.pi))
        bound = math.exp(-s * math.pi / 2) * (1 - math.exp(-s * (math.pi - 2 * theta))) / c_nu
        mods = np.geomspace(1e-6, eps, 12)
        args = np.concatenate([np.linspace(0, theta, 6), math.pi - np.linspace(0, theta, 6)])
        k = (mods[:, None] * np.exp(1j * args)[None, :]).ravel()
        margin = min(margin, float(np.min(np.abs(specfun.hankel1(nu, k))) / bound))
    ok = ode <= 1e-8 and conn <= 1e-10 and sym <= 1e-10 and wr <= 1e-8 and margin >= 1.0
    return CriterionResult(2, "special functions", ok, {
        "ode_residual": ode, "connection": conn, "symmetry": sym, "hankel_wronskian": wr,
        "region_bound_ratio": margin})


# -- 3 ------------------------------------------------------------------------------


def model_kernel_checks(sigma: float = 1.0) -> CriterionResult:
    r, w = mr.log_grid(40.0, 200)
    sym = conj = 0.0
    pos = np.inf
    for k in (0.3 * np.exp(0.4j), 0.05 * np.exp(0.7j), 1.2 * np.exp(0.2j)):
        ka = mr.model_kernel(k, sigma, r, w)
        kb = mr.model_kernel(-np.conj(k), sigma, r, w)
        sym = max(sym, ka.symmetry_residual())
        conj = max(conj, float(np.max(np.abs(ka.values - np.conj(kb.values))) / np.max(np.abs(ka.values))))
        # +Im on the right half, -Im on the left
        pos = min(pos, ka.imag_form_min_eig(), -_max_eig_imag(kb))
    f = _bump(2.0, 5.0)
    op = max(mr.model_operator_residual(k, sigma, f, (2.0, 5.0)) for k in (0.3 + 0.2j, 1.0 + 0.1j))
    ok = sym <= 1e-10 and conj <= 1e-10 and op <= 1e-6 and pos >= -1e-10
    return CriterionResult(3, "model kernel", ok, {
        "symmetry": sym, "conjugation": conj, "operator_residual": op, "imag_form_min": pos})


def _max_eig_imag(sample: mr.ModelKernelSample) -> float:
    m = sample.weighted().imag
    m = 0.5 * (m + m.T)
    ev = np.linalg.eigvalsh(m)
    return float(ev[-1] / max(np.max(np.abs(ev)), 1e-300))


# -- 4 ------------------------------------------------------------------------------


def expansion_scaling(sigma: float = 1.0) -> CriterionResult:
    ks = np.geomspace(1e-4, 1e-2, 5)
    errs, slope = mr.expansion_scaling(sigma, ks, 2.0, 1.5)
    far = mr.expansion_error(0.1 * np.exp(1j * math.pi / 4), sigma, 2.0, 1.5)
    ratio = float(errs[0] / far)
    ok = slope >= 0.4 and ratio <= 1e-3
    return CriterionResult(4, "expansion error scaling", ok, {
        "slope": slope, "ratio_1e-4_to_1e-1": ratio, "errors": errs.tolist()})


# -- 5 ------------------------------------------------------------------------------


def eigenvalue_ladder(sigma_values=SIGMAS) -> CriterionResult:
    worst_ratio = worst_root = 0.0
    ratios = {}
    for s in sigma_values:
        kap = mr.dirichlet_ladder(s, 12)
        q = kap[1:] / kap[:-1]
        ratios[s] = q.tolist()
        # q[n-1] = kappa_{n+1} / kappa_n
        worst_ratio = max(worst_ratio, float(np.max(np.abs(q[3:] / math.exp(-math.pi / s) - 1))))
        worst_root = max(worst_root, float(np.max(np.abs(specfun.bessel_k_imag_order(s, kap)))))
    ok = worst_ratio < 1e-3 and worst_root < 1e-12
    return CriterionResult(5, "eigenvalue ladder", ok, {
        "ratio_error_n_ge_4": worst_ratio, "root_residual": worst_root,
        "ratio_sigma1_last": ratios.get(1.0, [None])[-1]})


# -- 6 ------------------------------------------------------------------------------


def circle_residual(points) -> float:
    """Distance of the fourth point from the circle through the first three, relative to the radius."""
    a, b, c, d = (complex(p) for p in points[:4])
    # circumcentre of a, b, c
    m = np.array([[2 * (b - a).real, 2 * (b - a).imag], [2 * (c - a).real, 2 * (c - a).imag]])
    rhs = np.array([abs(b) ** 2 - abs(a) ** 2, abs(c) ** 2 - abs(a) ** 2])
    x, y = np.linalg.solve(m, rhs)
    centre = complex(x, y)
    rad = abs(a - centre)
    return abs(abs(d - centre) - rad) / rad


def zeta_periodicity(sigma_values=SIGMAS) -> CriterionResult:
    per = circ = 0.0
    for s in sigma_values:
        k = np.geomspace(1e-6, 1e-1, 37)
        z1 = mr.zeta_values(k, s)
        z2 = mr.zeta_values(k * math.exp(-math.pi / s), s)
        per = max(per, float(np.max(np.abs(z1 - z2) / np.abs(z1))))
        pts = mr.zeta_values(np.exp(np.array([-1.0, -2.1, -2.9, -3.7, -4.4])), s)
        circ = max(circ, circle_residual(pts[:4]), circle_residual(pts[1:]))
    ok = per < 1e-12 and circ < 1e-10
    return CriterionResult(6, "zeta log-periodicity", ok, {"periodicity": per, "circle_residual": circ})


# -- 7 ------------------------------------------------------------------------------


def resolvent_oscillation(preset: str = "compact-bump", mapper=map) -> CriterionResult:
    spec = potentials.preset(preset)
    fit = greens.extract_oscillation(spec, mapper=mapper)
    sigma = spec.sector.sigma
    ks = np.geomspace(1e-4, 1e-8, 200)
    w = specfun.branch_power(ks, 2 * spec.sector.nu)
    period = greens.detect_period(np.log(ks), np.imag(fit.f(w)), 0.5 * math.pi / sigma,
                                  1.5 * math.pi / sigma)
    per_err = abs(period / (math.pi / sigma) - 1)
    ok = fit.rank_one_defect < 1e-4 and fit.b_dispersion < 1e-4 and per_err < 1e-2
    return CriterionResult(7, "resolvent oscillation", ok, {
        "rank_one_defect": fit.rank_one_defect, "b_dispersion": fit.b_dispersion,
        "period_error": per_err, "fit_residual": fit.residual})


# -- 8 ------------------------------------------------------------------------------


def density_oscillation(preset: str = "compact-bump", mapper=map) -> CriterionResult:
    spec = potentials.preset(preset)
    out = greens.density_oscillation(spec, periods=4, mapper=mapper)
    amps = out.amplitudes
    ratio = float(amps[1:4].min() / amps[0])
    ok = ratio >= 0.5 and out.min_wronskian > 1e-3
    return CriterionResult(8, "spectral density oscillation", ok, {
        "amplitudes": amps.tolist(), "min_amplitude_ratio": ratio,
        "min_normalised_wronskian": out.min_wronskian,
        "period_error": abs(out.period * spec.sector.sigma / math.pi - 1)})


# -- 9 ------------------------------------------------------------------------------


def _wrap(x: float) -> float:
    return float(np.angle(np.exp(1j * x)))


def phase_shift_asymptotics(preset: str = "compact-bump", sigma_values=SIGMAS, mapper=map) -> CriterionResult:
    """Slope, constants and threshold residual of the phase shift.

    ``C2`` is compared both with ``3 pi/4 - theta0`` (what the Hankel
    asymptotics give) and with ``pi/4 - theta0``; the criterion asks for
    the latter.
    """
    details: dict = {}
    slope_err = const_c1 = c2_hankel = c2_quarter = resid = 0.0
    for s in sigma_values:
        spec = potentials.preset(preset, gamma=_gamma_for(s))
        curve = scattering.phase_shift_curve(spec, scattering.default_k_grid(s, 1e-6, 1e-2), mapper=mapper)
        slope, period = scattering.threshold_slope(curve)
        slope_err = max(slope_err, abs(slope / s - 1))
        fit = scattering.fit_threshold_asymptotics(curve, s)
        th = scattering.theoretical_constants(spec)
        # C1 enters only through a pi-periodic function
        const_c1 = max(const_c1, abs(_wrap(2 * (fit.C1 - th.theta0)) / 2))
        c2_hankel = max(c2_hankel, abs(_wrap(fit.C2 - th.C2)))
        c2_quarter = max(c2_quarter, abs(_wrap(fit.C2 - (math.pi / 4 - th.theta0))))
        pred = scattering.predicted_phase(1e-5, s, th.C1, th.C2)
        resid = max(resid, abs(_wrap(scattering.phase_shift(spec, 1e-5) - pred)))
        details[f"sigma={s:g}"] = {"slope": slope, "period": period, "C1": fit.C1, "C2": fit.C2,
                                   "theta0": th.theta0}
    details.update({"slope_rel_error": slope_err, "C1_vs_theta0_mod_pi": const_c1,
                    "C2_vs_3pi/4-theta0": c2_hankel, "C2_vs_pi/4-theta0": c2_quarter,
                    "threshold_residual_1e-5": resid})
    ok = slope_err < 5e-3 and const_c1 < 1e-2 and c2_quarter < 1e-2 and resid <= 1e-2
    return CriterionResult(9, "phase shift threshold asymptotics", ok, details)


# -- 10 ------------------------------------------------------------------------------


def wkb_mismatch(gamma: float = 1.25, mapper=map) -> CriterionResult:
    ks = np.geomspace(1e-2, 1e-6, 200)
    lam = ks**2
    x = -np.log(ks)
    integral = np.array([scattering.wkb_phase_integral(gamma, lv, 1.0, 2.0) for lv in lam])
    s_int = float(np.polyfit(x, integral, 1)[0])
    spec = potentials.preset("zero", gamma=gamma)
    sigma = spec.sector.sigma
    curve = scattering.phase_shift_curve(spec, ks, mapper=mapper)
    s_true, _ = scattering.threshold_slope(curve)
    root = math.sqrt(gamma)
    a = scattering.wkb_phase_integral(1.0, 1e-4, 1.0, 1.5)
    split = (100.0 / 1e-4) ** (1 / 1.5)
    b = scattering.wkb_phase_integral(1.0, 1e-4, 1.0, 1.5, split=2 * split)
    stab = abs(a - b)
    # the integral falls like +sqrt(gamma) ln sqrt(lam); the phase rises like -sigma ln sqrt(lam)
    ok = (abs(-s_int / root - 1) < 1e-2 and abs(s_true / sigma - 1) < 1e-2
          and abs(root - sigma) > 2e-2 * sigma and stab < 1e-8)
    return CriterionResult(10, "semiclassical integral mismatch", ok, {
        "integral_slope_vs_ln_sqrt_lambda": -s_int, "sqrt_gamma": root,
        "phase_slope_vs_minus_ln_sqrt_lambda": s_true, "sigma": sigma, "mu_1.5_cutoff_change": stab})


# -- 11 ------------------------------------------------------------------------------


def uniqueness_and_zero_modes(names=None) -> CriterionResult:
    names = tuple(potentials.PRESETS) if names is None else names
    prop = 0.0
    norms = {}
    r = np.geomspace(0.01, 50.0, 200)
    for name in names:
        spec = potentials.preset(name)
        sols = [radial_ode.regular_solution(spec, 0.25, r[-1], r0=r0, grid=r) for r0 in (1e-3, 3e-4, 1e-4)]
        ref = sols[0].u
        for s in sols[1:]:
            c = np.vdot(s.u, ref) / np.vdot(s.u, s.u)
            prop = max(prop, float(np.max(np.abs(ref - c * s.u)) / np.max(np.abs(ref))))
        zero = radial_ode.regular_solution(spec, 0.0, 1.0)
        u1, du1 = zero(np.array([1.0]))
        scale = math.hypot(abs(u1[0]), abs(du1[0]))
        coef = radial_ode.asymptotic_coefficients(spec, "power", 0.0)
        norms[name] = math.hypot(abs(coef.a_plus), abs(coef.a_minus)) / scale
    ok = prop <= 1e-8 and min(norms.values()) >= 1e-6
    return CriterionResult(11, "uniqueness and no zero modes", ok, {
        "proportionality_defect": prop, "coefficient_norms": norms})


# -- 12 ------------------------------------------------------------------------------


def classification() -> CriterionResult:
    a = sectors.classify_threshold(3, 1.25)
    b = sectors.classify_threshold(3, 4.0)
    first = (a.n_gamma == frozenset({0}) and a.m == 1 and abs(a.mu - 1) < 1e-12 and a.n_mu == 3
             and a.k_mu_kind is sectors.KMuKind.K2_LOG)
    second = b.m == 2 and abs(b.mu - 1.5) < 1e-12 and b.n_mu == 5
    table = all(sectors.resonance_multiplicity(3, m) == 2 * m + 1 for m in range(1, 21))
    return CriterionResult(12, "threshold classification", first and second and table, {
        "d3_gamma1.25": a.to_dict(), "d3_gamma4": b.to_dict(), "n_mu_2m_plus_1": table})


CHECKS = {
    1: periodic_phase,
    2: special_functions,
    3: model_kernel_checks,
    4: expansion_scaling,
    5: eigenvalue_ladder,
    6: zeta_periodicity,
    7: resolvent_oscillation,
    8: density_oscillation,
    9: phase_shift_asymptotics,
    10: wkb_mismatch,
    11: uniqueness_and_zero_modes,
    12: classification,
}
_PRESET_AWARE = {7, 8, 9}
_PARALLEL = {7, 8, 9, 10}


def run_criterion(number: int, preset: str = "compact-bump", mapper=map) -> CriterionResult:
    fn = CHECKS[number]
    kwargs = {}
    if number in _PRESET_AWARE:
        kwargs["preset"] = preset
    if number in _PARALLEL:
        kwargs["mapper"] = mapper
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", mr.TruncationWarning)
        res = fn(**kwargs)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(numbers=None, preset: str = "compact-bump", mapper=map) -> list[CriterionResult]:
    numbers = sorted(CHECKS) if numbers is None else numbers
    return [run_criterion(n, preset, mapper) for n in numbers]
