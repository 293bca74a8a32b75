"""Experiment configuration, JSON (de)serialisation and built-in presets."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .channel import ChannelConfig
from .errors import ConfigError
from .source import SourceParams
from .spatial import SpatialConfig, node_count


@dataclass(frozen=True)
class AccessConfig:
    zeta: float
    epsilon: float

    def __post_init__(self):
        ChannelConfig(self.zeta, self.epsilon, 1.0)


@dataclass(frozen=True)
class SimConfig:
    slots: int = 100_000
    topologies: int = 5
    base_seed: int = 0
    trace_decimation: int = 1

    def __post_init__(self):
        for name in ("slots", "topologies", "trace_decimation"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"sim.{name} must be a positive integer, got {v}")
        if not (0 <= int(self.base_seed) < 2**64):
            raise ConfigError(f"sim.base_seed must fit in 64 unsigned bits, got {self.base_seed}")


@dataclass(frozen=True)
class SweepConfig:
    """Directives for the sweep-style subcommands.

    ``k_max`` of ``None`` means "twice the AoI-optimal radius, in rings".
    """

    k_min: int = 1
    k_max: int | None = 60
    param: str = "eta"
    grid: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
    radii: tuple[float, ...] = ()
    alphas: tuple[float, ...] = ()
    cdf_points: int = 1001

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "radii", tuple(float(v) for v in self.radii))
        object.__setattr__(self, "alphas", tuple(float(v) for v in self.alphas))
        if self.cdf_points < 2:
            raise ConfigError("sweep.cdf_points must be at least 2")


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"output.format must be 'csv' or 'json', got {self.format!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceParams
    spatial: SpatialConfig
    channel: AccessConfig
    sim: SimConfig = field(default_factory=SimConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def channel_config(self, simulation: bool = False) -> ChannelConfig:
        m, m_sim = node_count(self.spatial)
        return ChannelConfig(self.channel.zeta, self.channel.epsilon, float(m_sim) if simulation else m)

    def with_rings(self, k: int) -> "ExperimentConfig":
        return replace(self, spatial=self.spatial.with_rings(k))

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("grid", "radii", "alphas"):
            d["sweep"][key] = list(d["sweep"][key])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_SECTIONS = {
    "source": SourceParams,
    "spatial": SpatialConfig,
    "channel": AccessConfig,
    "sim": SimConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
}


def _build(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section {section!r}: {exc}") from None


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")
    for required in ("source", "spatial", "channel"):
        if required not in data:
            raise ConfigError(f"missing configuration section {required!r}")
    parts = {name: _build(cls, data[name], name) for name, cls in _SECTIONS.items() if name in data}
    return ExperimentConfig(**parts)


def load(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return from_dict(data)


def merge(base: dict, overrides: dict) -> dict:
    """Deep-merge ``overrides`` into a copy of ``base``."""
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


# Parameter set used throughout the results section.
_BASE = {
    "source": {"q": 5e-3, "eta": 1.0},
    "spatial": {"ring_width": 10.0, "num_rings": 6, "rho": 5e-2, "alpha": 0.02, "law": "power"},
    "channel": {"zeta": 1e-4, "epsilon": 0.1},
}

PRESETS: dict[str, dict] = {
    "fig2a": merge(_BASE, {
        "spatial": {"num_rings": 6},
        "channel": {"zeta": 5e-4},
        "sim": {"slots": 3000, "topologies": 1},
    }),
    "fig2b": merge(_BASE, {
        "spatial": {"num_rings": 15},
        "channel": {"zeta": 5e-4},
        "sim": {"slots": 3000, "topologies": 1},
    }),
    "fig3": merge(_BASE, {
        "sweep": {"k_min": 1, "k_max": 60},
        "sim": {"slots": 100_000, "topologies": 5},
    }),
    "fig3-full": merge(_BASE, {
        "sweep": {"k_min": 1, "k_max": 60},
        "sim": {"slots": 1_000_000, "topologies": 20},
    }),
    "fig4": merge(_BASE, {
        "sweep": {"param": "eta", "grid": [1, 2, 3, 5, 7, 10, 15, 20, 30, 50], "k_max": None},
    }),
    # 5 m rings so that both 25 m and 125 m are whole numbers of rings.
    "fig5": merge(_BASE, {
        "spatial": {"ring_width": 5.0, "num_rings": 25},
        "sweep": {"radii": [25, 125], "alphas": [0.02, 0.06], "cdf_points": 1001},
    }),
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
