"""Two-state discrete-time Markov source.

State 0 leaves with probability ``q`` per slot, state 1 with ``eta * q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SourceParams:
    q: float
    eta: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.q <= 1.0):
            raise ConfigError(f"q must lie in [0, 1], got {self.q}")
        if not self.eta > 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.eta * self.q > 1.0 + 1e-15:
            raise ConfigError(
                f"eta*q = {self.eta * self.q} exceeds 1; transition matrix "
                "would not be row-stochastic"
            )

    @property
    def mu(self) -> float:
        """Second eigenvalue of the transition matrix, ``1 - q(1 + eta)``."""
        return 1.0 - self.q * (1.0 + self.eta)


@dataclass(frozen=True)
class Dist2:
    """Probability law over the two source states."""

    p0: float
    p1: float

    def __post_init__(self):
        for p in (self.p0, self.p1):
            if not (-_NORM_TOL <= p <= 1.0 + _NORM_TOL):
                raise ConfigError(f"probability out of range: {p}")
        if abs(self.p0 + self.p1 - 1.0) > _NORM_TOL:
            raise ConfigError(f"distribution does not sum to 1: {self.p0} + {self.p1}")

    @classmethod
    def from_p1(cls, p1: float) -> "Dist2":
        return cls(1.0 - p1, p1)

    def __getitem__(self, x: int) -> float:
        if x == 0:
            return self.p0
        if x == 1:
            return self.p1
        raise IndexError(x)

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1])


def transition_matrix(params: SourceParams) -> np.ndarray:
    q, eta = params.q, params.eta
    return np.array([[1.0 - q, q], [eta * q, 1.0 - eta * q]])


def stationary_dist(params: SourceParams) -> Dist2:
    eta = params.eta
    return Dist2(eta / (1.0 + eta), 1.0 / (1.0 + eta))


def evolve_p1(p1_start, params: SourceParams, steps):
    """Probability of state 1 after ``steps`` slots, vectorised over both args.

    Uses the spectral form ``pi1 + (p1_start - pi1) * mu**steps``.
    """
    pi1 = 1.0 / (1.0 + params.eta)
    steps = np.asarray(steps)
    if np.any(steps < 0):
        raise ValueError("steps must be non-negative")
    decay = np.power(params.mu, steps.astype(float))
    out = pi1 + (np.asarray(p1_start, dtype=float) - pi1) * decay
    return np.clip(out, 0.0, 1.0)


def evolve(dist: Dist2, params: SourceParams, steps: int) -> Dist2:
    """Distribution after ``steps`` applications of the transition matrix."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if steps == 0:
        return dist
    p1 = float(evolve_p1(dist.p1, params, steps))
    return Dist2.from_p1(p1)


def binary_entropy(p1):
    """Entropy in bits of a Bernoulli(p1) law, elementwise, with 0 log 0 = 0."""
    p = np.clip(np.asarray(p1, dtype=float), 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
        t0 = np.where(q > 0.0, -q * np.log2(np.where(q > 0.0, q, 1.0)), 0.0)
    return t0 + t1


def entropy(dist: Dist2) -> float:
    """Entropy of ``dist`` in bits."""
    out = 0.0
    for p in (dist.p0, dist.p1):
        if p > 0.0:
            out -= p * math.log2(p)
    return max(out, 0.0)
