"""
Experiment configuration: INI-style text with sections, or JSON.

Every field can be overridden from the environment as ``CRITSCAT_<FIELD>``
(for example ``CRITSCAT_GAMMA=4.25``).  INI layout::

    [sector]
    d = 3
    l = 0
    gamma = 1.25
    ; sigma = 1.0   (alternative to gamma)

    [potential]
    name = compact-bump

    [grid]
    k_min = 1e-06
    k_max = 0.01
    points_per_period = 48

    [probes]
    pairs = 1.5:2, 3:5

    [output]
    dir = .

    [tolerances]
    phase_slope = 0.005
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

ENV_PREFIX = "CRITSCAT_"

_SECTIONS = {
    "d": "sector", "l": "sector", "gamma": "sector", "sigma": "sector",
    "potential": "potential",
    "k_min": "grid", "k_max": "grid", "points_per_period": "grid",
    "probes": "probes",
    "output_dir": "output",
}
# INI key names that differ from field names
_INI_KEYS = {"potential": "name", "probes": "pairs", "output_dir": "dir"}


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key or line."""


@dataclass
class ExperimentConfig:
    """Inputs shared by the command-line subcommands.

    Attributes
    ----------
    d, l, gamma
        Sector parameters.  ``sigma`` may be given instead of ``gamma``;
        then ``gamma = (l + d/2 - 1)**2 + sigma**2``.
    potential
        Preset name or path to a JSON potential record.
    k_min, k_max, points_per_period
        Log-spaced wavenumber grid for sweeps.
    probes
        ``(r, r')`` pairs for Green's function samples.
    output_dir
        Directory for files written by subcommands.
    tolerances
        Named overrides of acceptance tolerances.
    """

    d: int = 3
    l: int = 0
    gamma: float | None = 1.25
    sigma: float | None = None
    potential: str = "compact-bump"
    k_min: float = 1e-6
    k_max: float = 1e-2
    points_per_period: int = 48
    probes: list = field(default_factory=lambda: [[1.5, 2.0], [1.5, 5.0], [3.0, 2.0],
                                                  [3.0, 5.0], [6.0, 2.0], [6.0, 5.0]])
    output_dir: str = "."
    tolerances: dict = field(default_factory=dict)

    def resolved_gamma(self) -> float:
        if self.sigma is not None:
            return (self.l + self.d / 2 - 1) ** 2 + self.sigma**2
        if self.gamma is None:
            raise ConfigError("either gamma or sigma must be set")
        return self.gamma

    def probe_tuples(self) -> tuple:
        return tuple((float(a), float(b)) for a, b in self.probes)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for f in fields(self):
            if f.name == "tolerances":
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            sec = _SECTIONS[f.name]
            if not cp.has_section(sec):
                cp.add_section(sec)
            if f.name == "probes":
                value = ", ".join(f"{a!r}:{b!r}" for a, b in value)
            elif isinstance(value, float):
                value = repr(value)
            cp.set(sec, _INI_KEYS.get(f.name, f.name), str(value))
        if self.tolerances:
            cp.add_section("tolerances")
            for key, val in sorted(self.tolerances.items()):
                cp.set("tolerances", key, repr(float(val)))
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {v}" for k, v in cp.items(sec)]
            lines.append("")
        return "\n".join(lines)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(name: str, raw, where: str):
    try:
        if name in ("d", "l", "points_per_period"):
            return int(raw)
        if name in ("gamma", "sigma", "k_min", "k_max"):
            return None if raw in (None, "", "none", "None") else float(raw)
        if name == "probes":
            if isinstance(raw, str):
                return [[float(x) for x in pair.split(":")] for pair in raw.split(",") if pair.strip()]
            return [[float(a), float(b)] for a, b in raw]
        if name in ("potential", "output_dir"):
            return str(raw)
        if name == "tolerances":
            return {str(k): float(v) for k, v in dict(raw).items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} ({exc})") from None
    raise ConfigError(f"{where}: unknown key")


def _from_mapping(data: dict, origin: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key, raw in data.items():
        if key not in _TYPES:
            raise ConfigError(f"{origin}: unknown key {key!r}")
        setattr(cfg, key, _convert(key, raw, f"{origin}: key {key!r}"))
    if "sigma" in data and "gamma" not in data:
        cfg.gamma = None
    return cfg


def parse_ini(text: str, origin: str = "<string>") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    reverse = {(sec, _INI_KEYS.get(name, name)): name for name, sec in _SECTIONS.items()}
    data: dict = {}
    for sec in cp.sections():
        for key, raw in cp.items(sec):
            if sec == "tolerances":
                data.setdefault("tolerances", {})[key] = raw
                continue
            name = reverse.get((sec, key))
            if name is None:
                raise ConfigError(f"{origin}: unknown key [{sec}] {key}")
            data[name] = raw
    return _from_mapping(data, origin)


def parse_json(text: str, origin: str = "<string>") -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{origin}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{origin}: top level must be an object")
    return _from_mapping(data, origin)


def apply_env(cfg: ExperimentConfig, environ=None) -> ExperimentConfig:
    """Override fields from ``CRITSCAT_<FIELD>`` variables."""
    environ = os.environ if environ is None else environ
    for name in _TYPES:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            raw = environ[key]
            if name == "tolerances":
                raw = json.loads(raw)
            setattr(cfg, name, _convert(name, raw, f"environment variable {key}"))
            if name == "sigma" and ENV_PREFIX + "GAMMA" not in environ:
                cfg.gamma = None
    return cfg


def load_config(path=None, environ=None) -> ExperimentConfig:
    """Defaults, then the file at ``path`` (JSON if it parses as such), then the environment."""
    if path is None:
        cfg = ExperimentConfig()
    else:
        p = Path(path)
        text = p.read_text()
        if p.suffix.lower() == ".json" or text.lstrip().startswith("{"):
            cfg = parse_json(text, str(p))
        else:
            cfg = parse_ini(text, str(p))
    return apply_env(cfg, environ)
