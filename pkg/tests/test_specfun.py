import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critscat import specfun
from critscat.specfun import (
    BranchedWavenumber,
    ComplexOrder,
    SpecialFunctionError,
    bessel_j,
    bessel_k_imag_order,
    branch_power,
    complex_gamma,
    hankel1,
    sigma_per,
)


def ref_j(nu, z):
    return complex(mp.besselj(mp.mpc(nu), mp.mpc(z)))


def ref_h1(nu, z):
    # mpmath's hankel1 is unreliable off the real axis at large |z|; use K instead
    nu, z = mp.mpc(nu), mp.mpc(z)
    return complex(2 / (1j * mp.pi) * mp.exp(-1j * nu * mp.pi / 2) * mp.besselk(nu, -1j * z))


# -- gamma ----------------------------------------------------------------------


def test_gamma_factorials():
    assert complex_gamma(1) == pytest.approx(1.0, rel=1e-14)
    assert complex_gamma(5) == pytest.approx(24.0, rel=1e-14)


def test_gamma_modulus_on_vertical_line():
    # |Gamma(1 + i)|^2 = pi / sinh(pi)
    assert abs(complex_gamma(1 + 1j)) == pytest.approx(math.sqrt(math.pi / math.sinh(math.pi)), rel=1e-13)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_gamma_poles(z):
    with pytest.raises(SpecialFunctionError):
        complex_gamma(z)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_gamma_matches_mpmath(z):
    if abs(z.imag) < 1e-3 and z.real < 0.5 and abs(z.real - round(z.real)) < 1e-3:
        return
    ref = complex(mp.gamma(mp.mpc(z)))
    if ref == 0 or not np.isfinite(abs(ref)):
        return
    assert abs(complex_gamma(z) - ref) <= 1e-12 * abs(ref)


# -- branch -------------------------------------------------------------------------


def test_branch_power_examples():
    nu = ComplexOrder(1.0).nu
    assert branch_power(1.0, 2 * nu) == pytest.approx(1.0)
    assert abs(branch_power(-1.0, 2 * nu)) == pytest.approx(math.exp(2 * math.pi), rel=1e-14)
    assert abs(branch_power(1j, 2 * nu)) == pytest.approx(math.exp(math.pi), rel=1e-14)


@given(st.floats(1e-6, 1e3), st.floats(0, math.pi), st.floats(0.1, 3))
def test_branch_power_modulus(mod, arg, sigma):
    k = BranchedWavenumber(mod * np.exp(1j * arg))
    w = k.power(complex(0, -2 * sigma))
    assert abs(w) == pytest.approx(math.exp(2 * sigma * k.arg_k), rel=1e-12)


def test_wavenumber_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        BranchedWavenumber(1 - 1j)
    with pytest.raises(ValueError):
        BranchedWavenumber(0)


def test_complex_order_validation():
    assert ComplexOrder(2.0).conjugate == -ComplexOrder(2.0).nu
    with pytest.raises(ValueError):
        ComplexOrder(0.0)


# -- Bessel J ----------------------------------------------------------------------------


def test_j_small_argument_normalisation():
    nu = -1j
    z = 1e-6
    val = bessel_j(nu, z) * complex_gamma(nu + 1) / branch_power(z / 2, nu)
    assert abs(val - 1) < 1e-10


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("z", [0.3, 2.5, 11.9, 12.1, 25.0, 3 + 4j, -7 + 0.2j, 40j, -30 + 20j])
def test_j_against_mpmath(sigma, z):
    ref = ref_j(-1j * sigma, z)
    assert abs(bessel_j(-1j * sigma, z) - ref) <= 2e-12 * abs(ref)


def test_j_reflection_symmetry():
    # J_nu(z) = e^{i nu pi} conj(J_{conj nu}(-conj z))
    nu = -1j
    for z in [0.5, 4 + 1j, 20 + 3j]:
        lhs = bessel_j(nu, z)
        rhs = np.exp(1j * nu * np.pi) * np.conj(bessel_j(np.conj(nu), -np.conj(z)))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_j_vectorised_matches_scalar():
    z = np.array([0.5, 13.0, 2 + 2j])
    vec = bessel_j(-1j, z)
    assert np.allclose(vec, [bessel_j(-1j, zz) for zz in z], rtol=1e-15)


def test_j_route_cross_check():
    bessel_j(-1j, np.array([8.0, 15.0]), check=True)


def test_argument_validation():
    with pytest.raises(ValueError):
        bessel_j(-1j, 0.0)
    with pytest.raises(ValueError):
        hankel1(-1j, 1 - 1j)


# -- Hankel ------------------------------------------------------------------------------------


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("z", [1e-3, 0.7, 5.0, 11.9, 12.5, 30.0, 50.0, 2 + 3j, 40j, -45 + 5j, -0.5 + 0.1j])
def test_h1_against_mpmath(sigma, z):
    ref = ref_h1(-1j * sigma, z)
    assert abs(hankel1(-1j * sigma, z) - ref) <= 2e-12 * abs(ref)


def test_h1_order_symmetry():
    nu = -1j
    for z in [0.5, 3 + 1j, 30.0, 20j]:
        h = hankel1(nu, z)
        assert abs(h - np.exp(-1j * nu * np.pi) * hankel1(-nu, z)) <= 1e-10 * abs(h)


def test_h1_large_argument_form():
    nu = -1j
    z = 30.0
    asym = math.sqrt(2 / (math.pi * z)) * np.exp(1j * (z - nu * math.pi / 2 - math.pi / 4))
    assert abs(hankel1(nu, z) / asym - 1) < 0.05


def test_h1_route_cross_check():
    hankel1(-1j, np.array([3.0, 10.0, 15.0]), check=True)


def test_h1_lower_bound_in_sector():
    sigma, theta = 1.0, math.pi / 4
    nu = -1j * sigma
    c_nu = abs(complex_gamma(nu + 1) * np.sin(nu * np.pi))
    bound = math.exp(-sigma * math.pi / 2) * (1 - math.exp(-sigma * (math.pi - 2 * theta))) / c_nu
    k = np.array([m * np.exp(1j * a) for m in (1e-5, 1e-3, 0.05) for a in (0, 0.4, theta, math.pi - 0.3)])
    assert np.all(np.abs(hankel1(nu, k)) >= bound)


def test_derivatives_by_finite_difference():
    nu, z, h = -1j, 2.0 + 0.5j, 1e-5
    fd = (hankel1(nu, z + h) - hankel1(nu, z - h)) / (2 * h)
    assert abs(specfun.hankel1_prime(nu, z) - fd) < 1e-8
    fd = (bessel_j(nu, z + h) - bessel_j(nu, z - h)) / (2 * h)
    assert abs(specfun.bessel_j_prime(nu, z) - fd) < 1e-8


# -- K_{i sigma} -----------------------------------------------------------------------------


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [1e-12, 1e-6, 0.01, 0.5, 1.0, 7.0, 50.0])
def test_k_imag_order_against_mpmath(sigma, x):
    ref = float(mp.re(mp.besselk(mp.mpc(0, sigma), x)))
    assert abs(bessel_k_imag_order(sigma, x) - ref) < 1e-12


def test_k_imag_order_is_real_and_changes_sign():
    x = np.geomspace(1e-6, 0.99, 400)
    vals = bessel_k_imag_order(1.0, x)
    assert vals.dtype == float
    assert np.any(np.diff(np.sign(vals)) != 0)


def test_k_imag_order_underflow_warning():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        assert bessel_k_imag_order(1.0, 800.0) == 0.0
    assert rec
    with pytest.raises(ValueError):
        bessel_k_imag_order(1.0, 0.0)


# -- sigma_per ------------------------------------------------------------------------------------

# arg computed with mpmath directly from the defining curve at t = pi/4
SIGMA_PER_REF = float(mp.pi / 4 + mp.arg(mp.exp(mp.pi) * mp.exp(-1j * mp.pi / 4) - mp.exp(1j * mp.pi / 4)))


def test_sigma_per_examples():
    assert sigma_per(1.0, 0.0) == 0.0
    assert sigma_per(1.0, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert sigma_per(1.0, math.pi / 4) == pytest.approx(SIGMA_PER_REF, abs=1e-14)
    assert round(sigma_per(1.0, math.pi / 4), 3) == -0.043


@given(st.floats(0.05, 4.0), st.floats(-50, 50))
def test_sigma_per_defining_relation(sigma, t):
    curve = specfun.sigma_per_curve(sigma, t)
    sp = sigma_per(sigma, t)
    assert abs(curve - abs(curve) * np.exp(1j * (sp - t))) <= 1e-12 * abs(curve)


@given(st.floats(0.05, 4.0), st.floats(-50, 50))
def test_sigma_per_periodic(sigma, t):
    assert abs(sigma_per(sigma, t + 2 * math.pi) - sigma_per(sigma, t)) < 1e-12
    # the ellipse is centrally symmetric, so pi is already a period
    assert abs(sigma_per(sigma, t + math.pi) - sigma_per(sigma, t)) < 1e-12


def test_sigma_per_continuous_on_fine_grid():
    for sigma in (0.5, 1.0, 2.0):
        t = np.linspace(-10, 10, 200_001)
        assert np.max(np.abs(np.diff(sigma_per(sigma, t)))) < 1e-3
