"""Slotted ALOHA over a collision channel with erasures."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class ChannelConfig:
    """Access parameters plus the (possibly non-integer) population ``m``."""

    zeta: float
    epsilon: float
    m: float

    def __post_init__(self):
        if not (0.0 <= self.zeta <= 1.0):
            raise ConfigError(f"zeta must lie in [0, 1], got {self.zeta}")
        if not (0.0 <= self.epsilon < 1.0):
            raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not self.m >= 0:
            raise ConfigError(f"m must be non-negative, got {self.m}")

    @property
    def effective_prob(self) -> float:
        """Probability that a given node delivers an unerased packet in a slot."""
        return self.zeta * (1.0 - self.epsilon)

    @property
    def load(self) -> float:
        """Channel load in unerased packets per slot."""
        return self.m * self.effective_prob


def success_prob(cfg: ChannelConfig) -> float:
    """Probability that exactly one unerased packet reaches the receiver."""
    g = cfg.effective_prob
    m = cfg.m
    if g == 0.0 or m == 0.0:
        return 0.0
    if g == 1.0:
        return 1.0 if m == 1.0 else 0.0
    return math.exp(math.log(m * g) + (m - 1.0) * math.log1p(-g))


def aoi_pmf(p_s: float, delta: int) -> float:
    """Stationary probability that the age of information equals ``delta``.

    A reception in the current slot counts as age 0.
    """
    if not (0.0 < p_s <= 1.0):
        raise ValueError(f"age of information has no stationary law for p_s={p_s}")
    if delta < 0:
        return 0.0
    if p_s == 1.0:
        return 1.0 if delta == 0 else 0.0
    return p_s * math.exp(delta * math.log1p(-p_s))


def aoi_mean(p_s: float) -> float:
    if not (0.0 < p_s <= 1.0):
        raise ValueError(f"age of information has no stationary law for p_s={p_s}")
    return (1.0 - p_s) / p_s


@dataclass(frozen=True)
class AoIRadius:
    radius: float
    """Radius putting the channel at unit load, ``(pi rho zeta (1-eps))^-1/2``."""
    grid_rings: int
    grid_radius: float
    printed_formula: float
    """``(pi rho zeta eps)^-1/2``; kept only for comparison, ``inf`` when eps=0."""


def aoi_optimal_radius(rho: float, zeta: float, epsilon: float, ring_width: float) -> AoIRadius:
    """Coverage radius maximising throughput, and its nearest ring multiple."""
    if not (rho > 0 and zeta > 0 and ring_width > 0 and 0 <= epsilon < 1):
        raise ConfigError("aoi_optimal_radius needs rho, zeta, ring_width > 0 and 0 <= epsilon < 1")
    radius = (math.pi * rho * zeta * (1.0 - epsilon)) ** -0.5
    k = max(1, int(math.floor(radius / ring_width + 0.5)))
    printed = (math.pi * rho * zeta * epsilon) ** -0.5 if epsilon > 0 else math.inf
    return AoIRadius(radius, k, k * ring_width, printed)
