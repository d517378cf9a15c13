"""
Angular-momentum sectors and threshold classification.

A radial operator in dimension ``d`` with a ``-gamma/r**2`` tail splits into
sectors labelled by ``l``.  The effective order is
``nu**2 = (l + d/2 - 1)**2 - gamma``; sectors with ``nu**2 < 0`` oscillate
in ``ln r`` at zero energy and carry the order ``nu = -i*sigma``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

BORDERLINE_RTOL = 1e-9
_MU_ONE_TOL = 1e-12
_INT64_MAX = 2**63 - 1


class BorderlineGammaError(ValueError):
    """``gamma`` coincides (to tolerance) with some ``(l + d/2 - 1)**2``."""


class KMuKind(str, enum.Enum):
    POWER_2MU = "power_2mu"
    K2_LOG = "k2_log"


def _centrifugal(d: int, l: int) -> float:
    return (l + d / 2.0 - 1.0) ** 2


@dataclass(frozen=True)
class Sector:
    """Single angular-momentum channel of the radial problem."""

    d: int
    l: int
    gamma: float
    nu_squared: float
    oscillatory: bool
    sigma: float | None
    special_2_0: bool

    @property
    def nu(self) -> complex:
        """Order of the model Bessel problem (``-i*sigma`` or ``sqrt(nu_squared)``)."""
        if self.oscillatory:
            return complex(0.0, -self.sigma)
        return complex(math.sqrt(self.nu_squared), 0.0)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "l": self.l,
            "gamma": self.gamma,
            "nu_squared": self.nu_squared,
            "oscillatory": self.oscillatory,
            "sigma": self.sigma,
            "special_2_0": self.special_2_0,
        }


@dataclass(frozen=True)
class ThresholdClassification:
    d: int
    gamma: float
    n_gamma: frozenset = field(default_factory=frozenset)
    m: int = 1
    mu: float = 1.0
    n_mu: int = 0
    k_mu_kind: KMuKind = KMuKind.POWER_2MU
    resonance_capable: bool = False

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "gamma": self.gamma,
            "n_gamma": sorted(self.n_gamma),
            "m": self.m,
            "mu": self.mu,
            "n_mu": self.n_mu,
            "k_mu_kind": self.k_mu_kind.value,
            "resonance_capable": self.resonance_capable,
        }


def _check_dims(d: int, l: int = 0) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    if int(l) != l or l < 0:
        raise ValueError(f"l must be a non-negative integer, got {l}")


def reduce(d: int, l: int, gamma: float) -> Sector:
    """Build the sector ``(d, l, gamma)``.

    Examples
    --------
    >>> reduce(3, 0, 1.25).sigma
    1.0
    """
    _check_dims(d, l)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    nu2 = _centrifugal(d, l) - gamma
    osc = nu2 < 0
    return Sector(
        d=int(d),
        l=int(l),
        gamma=float(gamma),
        nu_squared=nu2,
        oscillatory=osc,
        sigma=math.sqrt(-nu2) if osc else None,
        special_2_0=(d == 2 and l == 0),
    )


def validate_gamma(d: int, gamma: float) -> bool:
    """True when ``gamma`` stays away from every ``(l + d/2 - 1)**2``."""
    _check_dims(d)
    tol = BORDERLINE_RTOL * (1.0 + gamma)
    # the nearest l lies next to sqrt(gamma) - d/2 + 1
    l0 = max(0, int(math.floor(math.sqrt(gamma) - d / 2.0 + 1.0)))
    candidates = {0, l0, l0 + 1, max(l0 - 1, 0)}
    return min(abs(gamma - _centrifugal(d, l)) for l in candidates) > tol


def resonance_multiplicity(d: int, m: int) -> int:
    """Dimension of the zero-resonance space for the first non-oscillatory sector ``m``.

    Equals ``C(m+d-3, d-2) + C(m+d-2, d-2)``, the number of linearly
    independent harmonic polynomials of degree ``m`` in ``d`` variables.
    """
    _check_dims(d)
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    n = math.comb(m + d - 3, d - 2) + math.comb(m + d - 2, d - 2)
    if n > _INT64_MAX:
        raise OverflowError(f"multiplicity for d={d}, m={m} exceeds the 64-bit range")
    return n


def classify_threshold(d: int, gamma: float) -> ThresholdClassification:
    """Oscillatory set ``N_gamma`` and the first non-oscillatory sector.

    Raises
    ------
    BorderlineGammaError
        If ``gamma`` is (numerically) equal to some ``(l + d/2 - 1)**2``.
    """
    _check_dims(d)
    if not gamma > _centrifugal(d, 0):
        raise ValueError(f"need gamma > (d/2 - 1)**2 = {_centrifugal(d, 0)}, got {gamma}")
    if not validate_gamma(d, gamma):
        raise BorderlineGammaError(f"gamma={gamma} lies on the excluded set for d={d}")
    n_gamma = []
    l = 0
    while _centrifugal(d, l) < gamma:
        n_gamma.append(l)
        l += 1
    m = l
    mu = math.sqrt(_centrifugal(d, m) - gamma)
    if abs(mu - 1.0) <= _MU_ONE_TOL:
        kind = KMuKind.K2_LOG
    else:
        kind = KMuKind.POWER_2MU
    return ThresholdClassification(
        d=int(d),
        gamma=float(gamma),
        n_gamma=frozenset(n_gamma),
        m=m,
        mu=mu,
        n_mu=resonance_multiplicity(d, m),
        k_mu_kind=kind,
        resonance_capable=mu <= 1.0 + _MU_ONE_TOL,
    )
