"""
Radial potentials with a critical ``-gamma/r**2`` tail.

The radial operator in one sector is ``-u'' + (V_inf + V) u`` with

    V_inf(r) = (nu**2 - 1/4) / r**2 * chi(r > 1)
    V(r)     = W2(r) + ((l + d/2 - 1)**2 - 1/4) / r**2 * (1 - chi(r > 1))

where ``chi`` is a smooth cutoff that vanishes for ``r <= 1`` and equals 1
for ``r >= 2``.  ``W2`` is the short-range perturbation, given as one of a
few tagged forms so that its decay and singularity exponents are known.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .sectors import Sector, reduce

_GRID = np.logspace(-6, 6, 2401)


class ConditionViolationError(ValueError):
    """Sampled potential breaks a declared bound."""

    def __init__(self, message: str, r: float):
        super().__init__(f"{message} (first violation at r = {r:.6g})")
        self.r = r


def _ramp(x):
    """C-infinity ramp: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def _ramp_scalar(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    a = math.exp(-1.0 / x)
    return a / (a + math.exp(-1.0 / (1.0 - x)))


def _chi_scalar(r: float, c: float) -> float:
    s = _ramp_scalar((r - c) / c)
    return 1.0 if s >= 1.0 else math.sin(0.5 * math.pi * s)


def _chi_lt_scalar(r: float, c: float) -> float:
    s = _ramp_scalar((r - c) / c)
    return 0.0 if s >= 1.0 else math.cos(0.5 * math.pi * s)


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth partition ``chi**2 + chi_lt**2 = 1`` switching on ``[c, 2c]``."""

    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"cutoff start must be positive, got {self.c}")

    def _ramp(self, r):
        return _ramp((np.asarray(r, dtype=float) - self.c) / self.c)

    def chi(self, r):
        """``chi(r > c)``."""
        s = self._ramp(r)
        out = np.where(s >= 1.0, 1.0, np.sin(0.5 * np.pi * s))
        return float(out) if out.ndim == 0 else out

    def chi_lt(self, r):
        """``chi(r < c)``, the companion with ``chi**2 + chi_lt**2 = 1``."""
        # cos(pi/2) is not exactly zero in floating point
        s = self._ramp(r)
        out = np.where(s >= 1.0, 0.0, np.cos(0.5 * np.pi * s))
        return float(out) if out.ndim == 0 else out


def make_cutoff(c: float) -> CutoffSpec:
    return CutoffSpec(float(c))


_UNIT = CutoffSpec(1.0)
_HALF = CutoffSpec(0.5)


# -- short-range part -------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    kind: str = field(default="zero", init=False)

    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def scalar(self, r: float) -> float:
        return 0.0


@dataclass(frozen=True)
class CompactSupport:
    """Smooth bump of height ``amplitude`` supported on ``[1, R]``."""

    R: float = 3.0
    amplitude: float = 1.0
    kind: str = field(default="compact_support", init=False)

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError("compact support needs R > 1")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        x = (2 * r - (1 + self.R)) / (self.R - 1)
        inside = np.abs(x) < 1
        xs = np.where(inside, x, 0.0)
        return np.where(inside, self.amplitude * np.exp(1.0 - 1.0 / (1.0 - xs * xs)), 0.0)

    def scalar(self, r: float) -> float:
        x = (2 * r - (1 + self.R)) / (self.R - 1)
        if abs(x) >= 1:
            return 0.0
        return self.amplitude * math.exp(1.0 - 1.0 / (1.0 - x * x))


@dataclass(frozen=True)
class PowerTail:
    """``amplitude * r**(-2-eps) * chi(r > 1)``."""

    amplitude: float = 1.0
    eps: float = 1.0
    kind: str = field(default="power_tail", init=False)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * r ** (-2.0 - self.eps) * _UNIT.chi(r)

    def scalar(self, r: float) -> float:
        if r <= 1.0:
            return 0.0
        return self.amplitude * r ** (-2.0 - self.eps) * _chi_scalar(r, 1.0)


@dataclass(frozen=True)
class LocalSingularity:
    """``amplitude * r**(eps-2) * chi(r < 1/2)``, vanishing for ``r >= 1``."""

    amplitude: float = 1.0
    eps: float = 0.5
    kind: str = field(default="local_singularity", init=False)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * r ** (self.eps - 2.0) * _HALF.chi_lt(r)

    def scalar(self, r: float) -> float:
        if r >= 1.0:
            return 0.0
        return self.amplitude * r ** (self.eps - 2.0) * _chi_lt_scalar(r, 0.5)


W2 = Union[Zero, CompactSupport, PowerTail, LocalSingularity]
_W2_KINDS = {
    "zero": Zero,
    "compact_support": CompactSupport,
    "power_tail": PowerTail,
    "local_singularity": LocalSingularity,
}


def w2_from_dict(data: dict) -> W2:
    data = dict(data)
    kind = data.pop("kind", "zero")
    try:
        cls = _W2_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown short-range potential kind {kind!r}") from None
    return cls(**data)


# -- assembled sector potential ---------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    sector: Sector
    w2: W2 = field(default_factory=Zero)

    @property
    def local_kappa(self) -> float:
        """Frobenius parameter near the origin, ``kappa = l + d/2 - 1``."""
        return self.sector.l + self.sector.d / 2.0 - 1.0

    def v_infinity(self, r):
        return v_infinity(r, self.sector)

    def v_short(self, r):
        """``V = W2 + (kappa**2 - 1/4)/r**2 * (1 - chi(r > 1))``."""
        r = np.asarray(r, dtype=float)
        k2 = self.local_kappa**2
        out = self.w2(r) + (k2 - 0.25) / r**2 * (1.0 - _UNIT.chi(r))
        return float(out) if out.ndim == 0 else out

    def __call__(self, r):
        """Total potential ``V_inf + V`` entering the radial equation."""
        r = np.asarray(r, dtype=float)
        out = v_infinity(r, self.sector) + self.v_short(r)
        return float(out) if np.ndim(out) == 0 else out

    def scalar(self, r: float) -> float:
        """Fast ``V_inf + V`` at a single float radius."""
        chi = _chi_scalar(r, 1.0)
        near = self.local_kappa**2 - 0.25
        far = self.sector.nu_squared - 0.25
        return (far * chi + near * (1.0 - chi)) / (r * r) + self.w2.scalar(r)

    @property
    def support_radius(self) -> float | None:
        """Radius beyond which ``V`` vanishes, or None for a tail."""
        if isinstance(self.w2, CompactSupport):
            return max(self.w2.R, 2.0)
        if isinstance(self.w2, (Zero, LocalSingularity)):
            return 2.0
        return None

    def to_dict(self) -> dict:
        return {
            "d": self.sector.d,
            "l": self.sector.l,
            "gamma": self.sector.gamma,
            "w2": asdict(self.w2),
        }


def v_infinity(r, sector: Sector, cutoff: CutoffSpec = _UNIT):
    """``(nu**2 - 1/4)/r**2 * chi(r > 1)``."""
    if cutoff.c != 1.0:
        raise ValueError("the long-range part is defined with the unit cutoff")
    r = np.asarray(r, dtype=float)
    out = (sector.nu_squared - 0.25) / r**2 * cutoff.chi(r)
    return float(out) if out.ndim == 0 else out


def assemble_sector_potential(d: int, l: int, gamma: float, w2: W2 | None = None,
                              strict: bool = True) -> PotentialSpec:
    """Potential of sector ``(d, l, gamma)`` with short-range part ``w2``.

    With ``strict=True`` the local and tail bounds are checked on a log
    grid and a :class:`ConditionViolationError` names the first offending
    radius.
    """
    spec = PotentialSpec(reduce(d, l, gamma), Zero() if w2 is None else w2)
    if strict:
        report = validate_conditions(spec, "cond_1_1")
        if not report.passed:
            bad = [c for c in report.clauses if not c.passed][0]
            raise ConditionViolationError(f"W2 violates {bad.name}", bad.first_violation)
    return spec


# -- condition checks -------------------------------------------------------


@dataclass
class Clause:
    name: str
    passed: bool
    constant: float = math.nan
    first_violation: float = math.nan


@dataclass
class ConditionReport:
    which: str
    clauses: list = field(default_factory=list)
    C1: float = math.nan
    C2: float = math.nan
    eps: float = math.nan
    kappa: float = math.nan
    R: float = math.nan

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _edge_exponent(r, f, lo, hi):
    """Log-log slope of ``|f|`` over ``[lo, hi]``; None if ``f`` vanishes there."""
    sel = (r >= lo) & (r <= hi) & (np.abs(f) > 0)
    if sel.sum() < 4:
        return None
    return float(np.polyfit(np.log(r[sel]), np.log(np.abs(f[sel])), 1)[0])


def _bounded_toward_edge(q, edge_first: bool, edge_len: int = 200):
    """Sup of ``q`` is not attained growing toward the sampled edge.

    Returns ``(ok, index_of_first_violation)``; the edge region is the first
    (or last) ``edge_len`` samples.
    """
    if edge_first:
        edge, core = q[:edge_len][::-1], q[edge_len:]
    else:
        edge, core = q[-edge_len:], q[:-edge_len]
    bound = np.max(core) * (1 + 1e-9) + 1e-300
    over = np.nonzero(edge > bound)[0]
    if over.size == 0:
        return True, None
    i = over[0]
    return False, (edge_len - 1 - i) if edge_first else (len(q) - edge_len + i)


def _local_clause(r, w, name, eps_floor=1e-9):
    head = r <= 1
    rh, wh = r[head], w[head]
    s = _edge_exponent(rh, wh, rh[0], rh[0] * 100)
    eps = math.inf if s is None else s + 2.0
    e = min(eps, 2.0) if eps > eps_floor else eps_floor
    q = np.abs(wh) * rh ** (2.0 - e)
    ok, i = _bounded_toward_edge(q, edge_first=True)
    ok = ok and eps > eps_floor
    first = math.nan if ok else float(rh[i if i is not None else 0])
    return Clause(name, ok, float(np.max(q)), first), eps


def _tail_clause(r, w, name, eps_floor=1e-9):
    tail = r > 1
    rt, wt = r[tail], w[tail]
    s = _edge_exponent(rt, wt, rt[-1] / 100, rt[-1])
    eps = math.inf if s is None else -s - 2.0
    e = min(eps, 2.0) if eps > eps_floor else eps_floor
    q = np.abs(wt) * rt ** (2.0 + e)
    ok, i = _bounded_toward_edge(q, edge_first=False)
    ok = ok and eps > eps_floor
    first = math.nan if ok else float(rt[i if i is not None else -1])
    return Clause(name, ok, float(np.max(q)), first), eps


def _support_radius(spec: PotentialSpec, r, v):
    nz = np.nonzero(v != 0)[0]
    if nz.size == 0:
        return 0.0
    if nz[-1] == len(r) - 1:
        return math.inf
    a, b = r[nz[-1]], r[nz[-1] + 1]
    for _ in range(60):
        mid = 0.5 * (a + b)
        a, b = (mid, b) if spec.v_short(mid) != 0 else (a, mid)
    return b


def validate_conditions(spec: PotentialSpec, which: str = "cond_1_1",
                        r: np.ndarray | None = None) -> ConditionReport:
    """Check the admissibility conditions on a log grid ``[1e-6, 1e6]``.

    ``cond_1_1`` bounds ``|W2|`` by ``C1 r^(-2-eps1)`` for ``r > 1`` and by
    ``C2 r^(eps2-2)`` for ``r <= 1``.  ``cond_3_1`` requires ``V`` to vanish
    beyond some ``R > 3`` and ``cond_4_1`` an ``O(r^(-2-eps))`` tail; both
    also check ``C1 (r^-2 + 1) >= V >= (kappa**2 - 1/4) r^-2 - C2``.
    """
    r = _GRID if r is None else np.asarray(r, dtype=float)
    report = ConditionReport(which)
    if which == "cond_1_1":
        w = np.asarray(spec.w2(r), dtype=float)
        tail, eps1 = _tail_clause(r, w, "tail decay")
        head, eps2 = _local_clause(r, w, "local singularity")
        report.clauses += [tail, head]
        report.C1, report.C2 = tail.constant, head.constant
        report.eps = min(eps1, eps2)
        return report

    if which not in ("cond_3_1", "cond_4_1"):
        raise ValueError(f"unknown condition {which!r}")
    v = np.asarray(spec.v_short(r), dtype=float)
    small = r <= 1
    upper = v[small] / (r[small] ** -2 + 1.0)
    ok, i = _bounded_toward_edge(upper, edge_first=True)
    report.clauses.append(Clause("upper bound", ok, float(np.max(upper)),
                                 math.nan if ok else float(r[small][i])))
    report.C1 = float(max(np.max(v / (r**-2 + 1.0)), 0.0))
    # lower bound; shrink kappa when a negative head needs room
    k0 = spec.local_kappa
    for frac in np.linspace(1.0, 0.125, 8):
        kappa = k0 * frac
        deficit = (kappa**2 - 0.25) / r[small] ** 2 - v[small]
        ok, i = _bounded_toward_edge(deficit, edge_first=True)
        if ok:
            break
    report.kappa = float(kappa)
    report.C2 = float(max(np.max(deficit), 0.0))
    report.clauses.append(Clause("lower bound", ok, report.C2,
                                 math.nan if ok else float(r[small][i])))
    if which == "cond_3_1":
        R = spec.support_radius
        R = _support_radius(spec, r, v) if R is None else R
        report.R = float(R)
        report.clauses.append(Clause("compact support", math.isfinite(R), float(R),
                                     math.nan if math.isfinite(R) else float(r[-1])))
    else:
        clause, eps = _tail_clause(r, v, "tail decay")
        report.eps = eps
        report.clauses.append(clause)
    return report


# -- presets and serialization ----------------------------------------------

PRESETS = {
    "zero": Zero(),
    "compact-bump": CompactSupport(R=3.0, amplitude=1.0),
    "tail": PowerTail(amplitude=1.0, eps=1.0),
    "singular-head": LocalSingularity(amplitude=1.0, eps=0.5),
}


def preset(name: str, d: int = 3, l: int = 0, gamma: float = 1.25) -> PotentialSpec:
    try:
        w2 = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return assemble_sector_potential(d, l, gamma, w2)


def potential_from_dict(data: dict) -> PotentialSpec:
    return assemble_sector_potential(int(data["d"]), int(data["l"]), float(data["gamma"]),
                                     w2_from_dict(data.get("w2", {"kind": "zero"})))


def load_potential(source: str, d: int = 3, l: int = 0, gamma: float = 1.25) -> PotentialSpec:
    """Preset name or path to a JSON record produced by ``PotentialSpec.to_dict``."""
    if source in PRESETS:
        return preset(source, d, l, gamma)
    path = Path(source)
    if not path.exists():
        raise ValueError(f"{source!r} is neither a preset nor a file")
    return potential_from_dict(json.loads(path.read_text()))
