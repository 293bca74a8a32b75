"""Coverage geometry: concentric rings, node population and reading reliability."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def power_law(ring: np.ndarray, ring_width: float, alpha: float) -> np.ndarray:
    """Reading reliability ``(1 + i R)^-alpha`` for ring index ``i``."""
    return np.power(1.0 + np.asarray(ring, dtype=float) * ring_width, -alpha)


# Pluggable reliability laws; each maps (ring indices, ring width, alpha) -> probabilities.
RELIABILITY_LAWS = {"power": power_law}


@dataclass(frozen=True)
class SpatialConfig:
    ring_width: float
    num_rings: int
    rho: float
    alpha: float
    law: str = "power"

    def __post_init__(self):
        if not self.ring_width > 0:
            raise ConfigError(f"ring_width must be positive, got {self.ring_width}")
        if isinstance(self.num_rings, bool) or int(self.num_rings) != self.num_rings or self.num_rings < 1:
            raise ConfigError(f"num_rings must be a positive integer, got {self.num_rings}")
        object.__setattr__(self, "num_rings", int(self.num_rings))
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be non-negative, got {self.alpha}")
        if self.law not in RELIABILITY_LAWS:
            raise ConfigError(f"unknown reliability law {self.law!r}")

    @property
    def radius(self) -> float:
        """Coverage radius ``K * R`` in meters."""
        return self.num_rings * self.ring_width

    def with_rings(self, num_rings: int) -> "SpatialConfig":
        return SpatialConfig(self.ring_width, num_rings, self.rho, self.alpha, self.law)


def node_count(cfg: SpatialConfig) -> tuple[float, int]:
    """Return the real-valued population ``rho * pi * Rm^2`` and its rounding.

    The rounded count is what the simulator instantiates; it may be zero for
    tiny radii, which callers needing a topology must reject.
    """
    m = cfg.rho * math.pi * cfg.radius**2
    # round-half-up keeps 15.5 -> 16 independent of banker's rounding
    m_sim = int(math.floor(m + 0.5))
    return m, m_sim


def simulation_node_count(cfg: SpatialConfig) -> int:
    _, m_sim = node_count(cfg)
    if m_sim < 1:
        raise ConfigError(
            f"coverage radius {cfg.radius} m holds no node at density {cfg.rho}"
        )
    return m_sim


def region_pmf(cfg: SpatialConfig) -> np.ndarray:
    k = cfg.num_rings
    d = np.arange(k, dtype=float)
    return (2.0 * d + 1.0) / float(k * k)


def reliability_table(cfg: SpatialConfig) -> np.ndarray:
    """Reliability of every ring, indexed by ring number."""
    law = RELIABILITY_LAWS[cfg.law]
    return law(np.arange(cfg.num_rings), cfg.ring_width, cfg.alpha)


def reliability(cfg: SpatialConfig, region: int) -> float:
    if not (0 <= region < cfg.num_rings):
        raise IndexError(f"region {region} outside [0, {cfg.num_rings})")
    law = RELIABILITY_LAWS[cfg.law]
    return float(law(np.asarray(region), cfg.ring_width, cfg.alpha))


def sample_region(cfg: SpatialConfig, rng: np.random.Generator, size=None):
    """Ring index of node(s) placed uniformly on the coverage disc.

    The radius is drawn as ``Rm * sqrt(U)``, which has density ``2r / Rm^2``.
    """
    u = rng.random(size)
    r = cfg.radius * np.sqrt(u)
    ring = np.minimum(np.floor(r / cfg.ring_width).astype(np.int64), cfg.num_rings - 1)
    if size is None:
        return int(ring)
    return ring
