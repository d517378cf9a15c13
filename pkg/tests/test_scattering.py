import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critscat import scattering as sc
from critscat.greens import FitDegenerateError
from critscat.potentials import CompactSupport, preset
from critscat.specfun import sigma_per


def _circ(a, b, period=2 * math.pi):
    """Distance between two angles modulo ``period``."""
    d = (a - b) % period
    return min(d, period - d)


def test_doc_value(bump_spec):
    assert round(sc.phase_shift(bump_spec, 1.0), 6) == 5.744446


@pytest.mark.parametrize("name", ["zero", "compact-bump", "tail", "singular-head"])
def test_routes_agree(name):
    spec = preset(name)
    h = sc.phase_shift_value(spec, 0.5, route="hankel")
    t = sc.phase_shift_value(spec, 0.5, route="trig")
    assert _circ(h.value, t.value) < 1e-6
    assert h.route == "hankel" and t.route == "trig"


def test_trig_route_stable_under_longer_integration(bump_spec):
    a = sc.phase_shift_value(bump_spec, 1.0, route="trig", r_max=2e3).value
    b = sc.phase_shift_value(bump_spec, 1.0, route="trig", r_max=4e3).value
    assert _circ(a, b) < 1e-8


def test_auto_route_choice(bump_spec):
    assert sc.phase_shift_value(bump_spec, 2.0).route == "hankel"
    assert sc.phase_shift_value(preset("tail"), 0.5).route == "trig"
    assert sc.phase_shift_value(preset("tail"), 0.05).route == "hankel"


def test_phase_shift_input_errors(bump_spec):
    with pytest.raises(ValueError):
        sc.phase_shift(bump_spec, 0.0)
    with pytest.raises(ValueError):
        sc.phase_shift(bump_spec, 1.0, route="wkb")


def test_phase_shift_range(bump_spec):
    for k in (1e-4, 0.01, 0.3, 3.0):
        v = sc.phase_shift(bump_spec, k)
        assert 0.0 <= v < 2 * math.pi


def test_tail_radius():
    assert sc.tail_radius(1.0) == 1e4
    assert sc.tail_radius(1e-4) == pytest.approx(3.2e6)


def test_unwrap_phase():
    raw = (np.linspace(0, 20, 200)) % (2 * math.pi)
    assert np.allclose(sc.unwrap_phase(raw), np.linspace(0, 20, 200), atol=1e-12)
    with pytest.raises(sc.UndersamplingError):
        sc.unwrap_phase([0.0, 2.0])


def test_curve_rejects_coarse_or_bad_grid(bump_spec):
    with pytest.raises(sc.UndersamplingError):
        sc.phase_shift_curve(bump_spec, np.geomspace(1e-2, 1e-4, 10))
    with pytest.raises(ValueError):
        sc.phase_shift_curve(bump_spec, np.geomspace(1e-4, 1e-2, 10))


def test_default_grid_density():
    ks = sc.default_k_grid(1.0, 1e-6, 1e-2)
    assert ks[0] == pytest.approx(1e-2) and ks[-1] == pytest.approx(1e-6)
    assert np.max(-np.diff(np.log(ks))) <= math.pi / sc.PER_PERIOD_MIN + 1e-12


def _synthetic_curve(sigma, c1, c2, k_min=1e-6, k_max=1e-2):
    ks = sc.default_k_grid(sigma, k_min, k_max)
    return sc.PhaseShiftCurve(ks, sc.predicted_phase(ks, sigma, c1, c2), float(ks[0]), 0.0)


@settings(max_examples=15)
@given(st.floats(0.5, 2.0), st.floats(0.0, math.pi - 1e-3), st.floats(0.0, 2 * math.pi - 1e-3))
def test_fit_recovers_synthetic_constants(sigma, c1, c2):
    fit = sc.fit_threshold_asymptotics(_synthetic_curve(sigma, c1, c2), sigma)
    assert _circ(fit.C1, c1, math.pi) < 1e-10
    assert _circ(fit.C2, c2) < 1e-10
    assert np.max(np.abs(fit.residual_trace)) < 1e-10


def test_fit_c1_only_modulo_pi():
    a = sc.fit_threshold_asymptotics(_synthetic_curve(1.0, 0.4, 1.0), 1.0)
    b = sc.fit_threshold_asymptotics(_synthetic_curve(1.0, 0.4 + math.pi, 1.0), 1.0)
    assert a.C1 == pytest.approx(b.C1, abs=1e-10) and a.C2 == pytest.approx(b.C2, abs=1e-10)
    assert 0.0 <= a.C1 < math.pi
    assert set(a.to_dict()) == {"C1", "C2", "sigma", "k_grid", "residual_trace"}


def test_fit_window_and_degenerate():
    curve = _synthetic_curve(1.0, 0.4, 1.0)
    fit = sc.fit_threshold_asymptotics(curve, 1.0, k_max=1e-4)
    assert fit.k_grid.max() <= 1e-4
    with pytest.raises(ValueError):
        sc.fit_threshold_asymptotics(curve, 1.0, k_max=1e-9)
    tiny = 1e-6
    ripple_free = sc.PhaseShiftCurve(curve.k_grid, -tiny * np.log(curve.k_grid), 0.0, 0.0)
    with pytest.raises(FitDegenerateError):
        sc.fit_threshold_asymptotics(ripple_free, 50.0)


def test_threshold_slope_on_synthetic_curve():
    sigma = 1.3
    slope, period = sc.threshold_slope(_synthetic_curve(sigma, 0.2, 0.5))
    assert slope == pytest.approx(sigma, rel=1e-6)
    assert period == pytest.approx(math.pi / sigma, rel=1e-6)


def test_theoretical_constants_match_radius_formula(bump_spec):
    tc = sc.theoretical_constants(bump_spec)
    for R in (3.0, 7.5, 20.0):
        assert sc.d_at_radius(bump_spec, R) == pytest.approx(tc.D, rel=1e-8)
    assert sc.d_at_radius(bump_spec, 5.0, conjugate=True) == pytest.approx(np.conj(tc.D), rel=1e-8)
    assert tc.C1 == tc.theta0
    assert _circ(tc.C2 + tc.theta0, 0.75 * math.pi) < 1e-14


def test_theoretical_constants_for_tail():
    tc = sc.theoretical_constants(preset("tail"))
    assert tc.error < 1e-6
    assert 0 <= tc.theta0 < 2 * math.pi


def test_theoretical_constants_predict_small_k_phase(bump_spec):
    # the threshold form with the zero-energy constants reproduces sigma_sr
    tc = sc.theoretical_constants(bump_spec)
    for k in (1e-5, 3e-6):
        pred = sc.predicted_phase(k, 1.0, tc.C1, tc.C2)
        assert _circ(sc.phase_shift(bump_spec, k), float(pred)) < 1e-8


def test_predicted_phase_is_log_periodic_up_to_ramp():
    sigma, c1, c2 = 1.0, 0.3, 1.1
    k = 1e-3
    f = math.exp(-math.pi / sigma)
    assert sc.predicted_phase(k * f, sigma, c1, c2) - sc.predicted_phase(k, sigma, c1, c2) == pytest.approx(math.pi)


def test_physical_offsets():
    assert sc.physical_offset(3, 0) == 0.0
    assert sc.physical_offset(2, 0) == pytest.approx(-math.pi / 4)
    assert sc.physical_offset(3, 1) == pytest.approx(math.pi / 2)
    lam = 0.49
    base = sc.phase_shift(preset("zero", 2, 0, 1.5), 0.7)
    assert _circ(sc.physical_phase_shift(2, 0, 1.5, lam), (base - math.pi / 4) % (2 * math.pi)) < 1e-12
    with pytest.raises(ValueError):
        sc.physical_phase_shift(3, 0, 1.25, -1.0)


def test_physical_phase_shift_with_short_range_part():
    w2 = CompactSupport(R=3.0)
    assert _circ(sc.physical_phase_shift(3, 0, 1.25, 1.0, w2), sc.phase_shift(preset("compact-bump"), 1.0)) < 1e-12


def test_wkb_against_mpmath():
    gamma, lam, r0, mu = 1.25, 0.3, 0.5, 2.0
    ref = mpmath.quad(lambda r: mpmath.sqrt(lam) - mpmath.sqrt(lam + gamma * r**-mu), [r0, 1, 10, 100, mpmath.inf])
    assert sc.wkb_phase_integral(gamma, lam, r0, mu) == pytest.approx(float(ref), rel=1e-10)


@given(st.floats(1.2, 4.0), st.floats(1e-3, 10.0))
def test_wkb_independent_of_split(mu, lam):
    a = sc.wkb_phase_integral(1.25, lam, 0.5, mu)
    b = sc.wkb_phase_integral(1.25, lam, 0.5, mu, split=3.0 * (100 * 1.25 / lam) ** (1 / mu))
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_wkb_additive_in_lower_limit():
    g, lam, mu = 2.0, 0.1, 2.5
    whole = sc.wkb_phase_integral(g, lam, 0.2, mu)
    part = sc.wkb_phase_integral(g, lam, 1.0, mu)
    middle = float(mpmath.quad(lambda r: mpmath.sqrt(lam) - mpmath.sqrt(lam + g * r**-mu), [0.2, 1.0]))
    assert whole == pytest.approx(part + middle, rel=1e-11)


def test_wkb_log_growth_for_inverse_square():
    # the integral behaves like -sqrt(gamma) ln sqrt(lam) + const as lam -> 0
    g = 1.25
    lams = np.array([1e-6, 1e-8])
    vals = np.array([sc.wkb_phase_integral(g, x, 1.0, 2.0) for x in lams])
    slope = (vals[1] - vals[0]) / (np.log(np.sqrt(lams[1])) - np.log(np.sqrt(lams[0])))
    assert slope == pytest.approx(math.sqrt(g), rel=1e-3)


def test_wkb_errors():
    with pytest.raises(sc.DivergentIntegrandError):
        sc.wkb_phase_integral(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        sc.wkb_phase_integral(1.0, 0.0, 1.0, 2.0)


def test_curve_export(tmp_path, bump_spec):
    ks = sc.default_k_grid(1.0, 1e-3, 1e-2)
    curve = sc.phase_shift_curve(bump_spec, ks)
    path = tmp_path / "curve.csv"
    curve.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "ln_k,sigma_sr" and len(lines) == ks.size + 1
    back = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 1], curve.sigma_sr)
    assert curve.to_dict()["anchor_k"] == pytest.approx(1e-2)
    assert np.max(curve.errors) < 1e-6
