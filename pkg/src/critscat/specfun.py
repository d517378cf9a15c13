"""
Complex-order special functions.

Everything here works with a purely imaginary (or more generally complex)
Bessel order and complex arguments in the closed upper half-plane, with
powers taken on the branch ``arg z in [0, pi]``.

Routes
------
- ``|z| <= SWITCH_RADIUS``: ascending power series for J, connection
  formula for H^(1).
- ``|z| > SWITCH_RADIUS`` (or far up the imaginary axis for H^(1)):
  trapezoidal quadrature of the Poisson integral for J and of the
  exponentially weighted Laplace-type integral for H^(1), after
  substitutions that make the integrands analytic in a strip so the
  trapezoid rule converges geometrically.

The functions accept scalars or numpy arrays for the argument; the order
is always a scalar.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

SWITCH_RADIUS = 12.0
# Above this imaginary part the connection formula cancels badly for H^(1).
HANKEL_IMAG_SWITCH = 2.0

class SpecialFunctionError(ArithmeticError):
    """Raised when a special function cannot be evaluated reliably."""


class LossOfPrecisionWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ComplexOrder:
    """Purely imaginary Bessel order ``nu = -i*sigma`` with ``sigma > 0``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def nu(self) -> complex:
        return complex(0.0, -self.sigma)

    @property
    def conjugate(self) -> complex:
        return complex(0.0, self.sigma)


@dataclass(frozen=True)
class BranchedWavenumber:
    """Wavenumber in the closed upper half-plane with ``arg k in [0, pi]``."""

    k: complex

    def __post_init__(self):
        k = complex(self.k)
        if k == 0:
            raise ValueError("wavenumber must be nonzero")
        if k.imag < 0 and k.imag != 0.0:
            raise ValueError(f"wavenumber must satisfy Im k >= 0, got {k}")
        object.__setattr__(self, "k", complex(k.real, abs(k.imag)))

    @property
    def arg_k(self) -> float:
        return float(branch_arg(self.k))

    def power(self, w: complex) -> complex:
        return complex(branch_power(self.k, w))


def _upper(z):
    """Move signed-zero imaginary parts onto the upper side of the cut."""
    z = np.asarray(z, dtype=complex)
    return np.where(z.imag == 0.0, z.real + 0.0j, z)


def branch_arg(k):
    """Argument of ``k`` in ``[0, pi]`` (``Im k >= 0`` required)."""
    k = _upper(k)
    if np.any(k.imag < 0):
        raise ValueError("branch_arg needs Im k >= 0")
    return np.angle(k)


def branch_power(k, w):
    """``k**w = exp(w*(ln|k| + i*arg k))`` with ``arg k in [0, pi]``."""
    k = _upper(k)
    if np.any(k == 0):
        raise ValueError("branch_power is undefined at k = 0")
    out = np.exp(w * (np.log(np.abs(k)) + 1j * branch_arg(k)))
    return out if out.ndim else complex(out)


def complex_gamma(z):
    """Gamma function for complex argument, via the principal log-gamma."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0 and z.real == math.floor(z.real):
        raise SpecialFunctionError(f"Gamma has a pole at {z.real:g}")
    return complex(np.exp(special.loggamma(z)))


def _check_argument(z):
    z = _upper(z)
    if np.any(z == 0):
        raise ValueError("argument must be nonzero")
    if np.any(z.imag < 0):
        raise ValueError("argument must satisfy arg z in [0, pi]")
    return z


def _j_series(order: complex, z: np.ndarray) -> np.ndarray:
    q = -0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    biggest = np.ones(z.shape)
    m = 0
    while True:
        m += 1
        term = term * q / (m * (order + m))
        total = total + term
        biggest = np.maximum(biggest, np.abs(term))
        if m > 4 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
        if m > 400:
            raise SpecialFunctionError("Bessel series failed to converge")
    scale = biggest / np.maximum(np.abs(total), 1e-300)
    if np.any(scale > 1e6):
        warnings.warn(
            f"Bessel series cancellation factor {scale.max():.2e}",
            LossOfPrecisionWarning,
            stacklevel=3,
        )
    lead = np.exp(order * (np.log(np.abs(z) / 2) + 1j * np.angle(z)))
    return lead * total / complex_gamma(order + 1)


def _chunked(fn, order: complex, z: np.ndarray, nodes: int) -> np.ndarray:
    """Apply a quadrature route in blocks so the node matrix stays small."""
    block = max(1, 4_000_000 // max(nodes, 1))
    if z.size <= block:
        return fn(order, z)
    return np.concatenate([fn(order, z[i:i + block]) for i in range(0, z.size, block)])


def _j_poisson(order: complex, z: np.ndarray) -> np.ndarray:
    # t = tanh(u) in the Poisson integral; integrand analytic for |Im u| < pi/2
    if order.real <= -0.5:
        raise SpecialFunctionError("Poisson integral needs Re(order) > -1/2")
    zmax = float(np.max(np.abs(z)))
    d = 0.5
    h = 2 * np.pi * d / (np.tan(d) * zmax + 2 * abs(order.imag) * d + 40.0)
    n = int(np.ceil(42.0 / h))
    u = h * np.arange(-n, n + 1)
    au = np.abs(u)
    log_sech = -(au + np.log1p(np.exp(-2 * au)) - np.log(2.0))
    weight = np.exp((2 * order + 1) * log_sech)
    phase = np.exp(1j * np.multiply.outer(z, np.tanh(u)))
    integral = h * (phase @ weight)
    lead = np.exp(order * (np.log(np.abs(z) / 2) + 1j * np.angle(z)))
    return lead * integral / (np.sqrt(np.pi) * complex_gamma(order + 0.5))


def bessel_j(order, z, check: bool = False):
    """Bessel function of the first kind ``J_order(z)``.

    Parameters
    ----------
    order : complex
        Bessel order (scalar).
    z : complex or array_like
        Nonzero argument(s) with ``arg z in [0, pi]``.
    check : bool
        Evaluate both routes where both apply and raise
        :class:`SpecialFunctionError` if they disagree beyond 1e-6.
    """
    order = complex(order)
    z = _check_argument(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) <= SWITCH_RADIUS
    if small.any():
        out[small] = _j_series(order, z[small])
    if (~small).any():
        zs = z[~small]
        out[~small] = _chunked(_j_poisson, order, zs, int(7 * np.abs(zs).max()) + 1000)
    if check and order.real > -0.5:
        mid = np.abs(z) <= 20.0
        if mid.any():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LossOfPrecisionWarning)
                other = _j_poisson(order, z[mid]) if small.any() else _j_series(order, z[mid])
            _compare(out[mid], other, "bessel_j")
    return complex(out[0]) if scalar else out


def _h1_laplace(order: complex, z: np.ndarray) -> np.ndarray:
    if order.real < -0.5:
        # H1_{-mu} = exp(i mu pi) H1_mu
        return np.exp(1j * order * np.pi) * _h1_laplace(-order, z)
    # t = exp(2x); integrand analytic for |Im x| < pi/4
    d = 0.7
    h = 2 * np.pi * d / (40.0 + abs(order.imag) * (2 * d + np.pi))
    x = np.arange(-42.0, 4.6, h)
    t = np.exp(2 * x)
    base = 2 * np.exp((2 * order + 1) * x - t)
    ratio = (1.0 / (2j * z))[:, None]
    factor = np.exp((order - 0.5) * np.log(1.0 - ratio * t))
    integral = h * (factor @ base)
    pref = np.sqrt(2 / (np.pi * z)) * np.exp(1j * (z - order * np.pi / 2 - np.pi / 4))
    return pref * integral / complex_gamma(order + 0.5)


def _h1_connection(order: complex, z: np.ndarray) -> np.ndarray:
    s = np.sin(order * np.pi)
    if abs(s) < 1e-14:
        raise SpecialFunctionError("connection formula needs sin(order*pi) != 0")
    jm = bessel_j(-order, z)
    jp = bessel_j(order, z)
    return (jm - np.exp(-1j * order * np.pi) * jp) / (1j * s)


def hankel1(order, z, check: bool = False):
    """Hankel function of the first kind ``H^(1)_order(z)``.

    Near the origin the connection formula in terms of ``J_{+-order}`` is
    used; for large ``|z|`` or large ``Im z`` the Laplace-type integral.
    With ``check=True`` both routes are compared (where the connection
    formula is numerically meaningful) and a :class:`SpecialFunctionError`
    is raised on disagreement beyond 1e-6.
    """
    order = complex(order)
    z = _check_argument(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex)
    near = (np.abs(z) <= SWITCH_RADIUS) & (z.imag <= HANKEL_IMAG_SWITCH)
    if near.any():
        out[near] = _h1_connection(order, z[near])
    if (~near).any():
        out[~near] = _chunked(_h1_laplace, order, z[~near], 1000)
    if check:
        both = (np.abs(z) <= 20.0) & (z.imag <= HANKEL_IMAG_SWITCH) & (np.abs(z) > 1e-3)
        if both.any():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LossOfPrecisionWarning)
                _compare(_h1_connection(order, z[both]), _h1_laplace(order, z[both]), "hankel1")
    return complex(out[0]) if scalar else out


def _compare(a, b, name):
    err = np.abs(a - b) / np.maximum(np.abs(a), 1e-300)
    if np.any(err > 1e-6):
        raise SpecialFunctionError(f"{name}: routes disagree (max rel. diff {err.max():.2e})")


def hankel1_prime(order, z):
    """Derivative ``d/dz H^(1)_order(z) = (order/z) H_order - H_{order+1}``."""
    z = _check_argument(z)
    return complex(order) / z * hankel1(order, z) - hankel1(complex(order) + 1, z)


def bessel_j_prime(order, z):
    z = _check_argument(z)
    return complex(order) / z * bessel_j(order, z) - bessel_j(complex(order) + 1, z)


def bessel_k_imag_order(sigma: float, x):
    """Macdonald function ``K_{i sigma}(x)`` for real ``x > 0``.

    Evaluates ``int_0^inf exp(-x cosh t) cos(sigma t) dt`` with the
    trapezoid rule, which converges geometrically here because the
    integrand is even and entire in ``t``.  Returns exactly 0 (with a
    warning) for ``x > 700``.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise ValueError("x must be positive")
    out = np.zeros(xs.shape)
    for i, xv in enumerate(xs):
        if xv > 700.0:
            warnings.warn(f"K_i{sigma}({xv:g}) underflows to zero", RuntimeWarning, stacklevel=2)
            continue
        h = min(0.1, 0.7 / np.sqrt(xv), 1.0 / max(sigma, 1.0))
        t_max = np.arccosh(1.0 + 40.0 / xv) + 2 * h
        t = h * np.arange(int(np.ceil(t_max / h)) + 1)
        f = np.exp(-xv * (np.cosh(t) - 1.0)) * np.cos(sigma * t)
        out[i] = np.exp(-xv) * h * (f.sum() - 0.5 * f[0])
    return float(out[0]) if np.ndim(x) == 0 else out


def sigma_per(sigma: float, t):
    """Continuous periodic phase function with ``sigma_per(0) = 0``.

    Defined by ``e^{pi sigma} e^{-it} - e^{it} = r(t) e^{i(sigma_per(t) - t)}``
    with ``r(t) > 0``.  The curve on the left is an ellipse traversed once
    clockwise, with continuously unwrapped argument ``-atan(c tan t)``
    where ``c = coth(pi sigma / 2)``.  Hence ``sigma_per = t - atan(c tan t)``,
    which written without the tangent is bounded and pi-periodic.
    """
    t = np.asarray(t, dtype=float)
    c = 1.0 / np.tanh(np.pi * sigma / 2)
    s, co = np.sin(t), np.cos(t)
    out = -np.arctan((c - 1.0) * s * co / (co * co + c * s * s)) + 0.0
    return float(out) if out.ndim == 0 else out


def sigma_per_curve(sigma: float, t):
    """``e^{pi sigma} e^{-it} - e^{it}``, the curve defining :func:`sigma_per`."""
    t = np.asarray(t, dtype=float)
    return np.exp(np.pi * sigma) * np.exp(-1j * t) - np.exp(1j * t)
