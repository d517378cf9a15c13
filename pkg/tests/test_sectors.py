import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from critscat.sectors import (
    BorderlineGammaError,
    KMuKind,
    classify_threshold,
    reduce,
    resonance_multiplicity,
    validate_gamma,
)


def test_reduce_examples():
    s = reduce(3, 0, 1.25)
    assert s.oscillatory and s.sigma == pytest.approx(1.0)
    assert s.nu == complex(0, -1.0)
    s = reduce(3, 1, 1.0)
    assert not s.oscillatory and s.nu_squared == pytest.approx(1.25) and s.sigma is None
    s = reduce(2, 0, 1.0)
    assert s.oscillatory and s.sigma == pytest.approx(1.0) and s.special_2_0


@pytest.mark.parametrize("args", [(1, 0, 1.0), (3, -1, 1.0), (3, 0, 0.0), (3, 0.5, 1.0)])
def test_reduce_rejects_bad_input(args):
    with pytest.raises(ValueError):
        reduce(*args)


@given(st.integers(2, 8), st.integers(0, 10), st.floats(0.01, 200))
def test_reduce_invariants(d, l, gamma):
    s = reduce(d, l, gamma)
    assert s.oscillatory == (gamma > (l + d / 2 - 1) ** 2)
    if s.oscillatory:
        assert s.sigma**2 + s.nu_squared == pytest.approx(0.0, abs=1e-9 * (1 + gamma))
    assert s.special_2_0 == (d == 2 and l == 0)
    assert reduce(**{k: v for k, v in s.to_dict().items() if k in ("d", "l", "gamma")}) == s


def test_classification_examples():
    c = classify_threshold(3, 1.25)
    assert c.n_gamma == {0} and c.m == 1 and c.mu == pytest.approx(1.0)
    assert c.k_mu_kind is KMuKind.K2_LOG and c.resonance_capable and c.n_mu == 3
    c = classify_threshold(3, 4.0)
    assert c.n_gamma == {0, 1} and c.m == 2 and c.mu == pytest.approx(1.5)
    assert not c.resonance_capable and c.n_mu == 5 and c.k_mu_kind is KMuKind.POWER_2MU
    c = classify_threshold(2, 0.5)
    assert c.n_gamma == {0} and c.m == 1 and c.mu == pytest.approx(math.sqrt(0.5))
    assert c.resonance_capable and c.k_mu_kind is KMuKind.POWER_2MU


def test_classification_rejects_borderline_and_small_gamma():
    with pytest.raises(BorderlineGammaError):
        classify_threshold(3, 2.25)
    with pytest.raises(ValueError):
        classify_threshold(3, 0.2)


def test_validate_gamma_examples():
    assert not validate_gamma(3, 2.25)
    assert validate_gamma(3, 2.26)
    assert not validate_gamma(2, 1.0)
    assert not validate_gamma(3, 2.25 * (1 + 1e-12))


@given(st.integers(2, 6), st.floats(0.3, 60), st.floats(0.0, 20))
def test_classification_monotone_in_gamma(d, gamma, extra):
    g2 = gamma + extra
    assume(gamma > (d / 2 - 1) ** 2 and validate_gamma(d, gamma) and validate_gamma(d, g2))
    a, b = classify_threshold(d, gamma), classify_threshold(d, g2)
    assert a.n_gamma <= b.n_gamma
    assert all((l + d / 2 - 1) ** 2 < gamma for l in a.n_gamma)
    assert a.m not in a.n_gamma and a.mu > 0
    assert a.mu**2 == pytest.approx((a.m + d / 2 - 1) ** 2 - gamma, rel=1e-9, abs=1e-12)


def test_multiplicity_examples():
    assert resonance_multiplicity(3, 1) == 3
    assert resonance_multiplicity(3, 2) == 5
    assert resonance_multiplicity(2, 1) == 2


def test_multiplicity_counts_harmonics_in_three_dimensions():
    assert all(resonance_multiplicity(3, m) == 2 * m + 1 for m in range(1, 21))


@given(st.integers(2, 7), st.integers(1, 15))
def test_multiplicity_equals_harmonic_polynomial_count(d, m):
    # dim of degree-m harmonic polynomials = C(m+d-1, d-1) - C(m+d-3, d-1)
    expected = math.comb(m + d - 1, d - 1) - math.comb(m + d - 3, d - 1)
    assert resonance_multiplicity(d, m) == expected


def test_multiplicity_overflow_and_domain():
    with pytest.raises(OverflowError):
        resonance_multiplicity(200, 200)
    with pytest.raises(ValueError):
        resonance_multiplicity(3, 0)
