"""Uncertainty of a forgetful receiver that keeps only its last reading and age.

The receiver knows the ensemble probability ``c`` that a decoded reading is
correct (averaged over the sender's ring), the source statistics, and the
age ``delta`` of its last reading ``y``.  From these it forms the posterior
over the current source state and its entropy ``h(y, delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, success_prob
from .errors import TruncationError
from .source import (
    Dist2,
    SourceParams,
    binary_entropy,
    entropy,
    evolve,
    evolve_p1,
    stationary_dist,
)
from .spatial import SpatialConfig, region_pmf, reliability_table

TAIL_TOL = 1e-10
# Largest number of ages enumerated explicitly per reading value.
MAX_DEPTH = 10_000_000


@dataclass(frozen=True)
class ReceiverState:
    """Last reading (``None`` before any reception) and its age in slots."""

    last_reading: int | None = None
    delta: int = 0

    def step(self, reading: int | None) -> "ReceiverState":
        if reading is None:
            return ReceiverState(self.last_reading, self.delta + 1)
        return ReceiverState(int(reading), 0)


@dataclass(frozen=True)
class BeliefTable:
    reset_posterior: tuple[Dist2, Dist2]
    reading_marginal: Dist2
    c: float


def aggregate_correct_prob(spatial: SpatialConfig) -> float:
    """Probability that a decoded reading is correct, averaged over rings."""
    return float(np.sum(region_pmf(spatial) * reliability_table(spatial)))


def _likelihood(c: float, y: int, x: int) -> float:
    return c if x == y else 1.0 - c


def posterior_at_reception(source: SourceParams, c: float, y: int) -> Dist2:
    """Bayes update of the stationary prior on receiving reading ``y``."""
    if y not in (0, 1):
        raise ValueError(f"reading must be 0 or 1, got {y}")
    pi = stationary_dist(source)
    joint = [_likelihood(c, y, x) * pi[x] for x in (0, 1)]
    norm = joint[0] + joint[1]
    if norm <= 0.0:
        raise ZeroDivisionError(f"reading {y} has zero probability")
    p1 = joint[1] / norm
    return Dist2.from_p1(p1)


def reading_marginal(source: SourceParams, c: float) -> Dist2:
    pi = stationary_dist(source)
    p0 = c * pi.p0 + (1.0 - c) * pi.p1
    return Dist2.from_p1(1.0 - p0)


def belief_table(source: SourceParams, spatial: SpatialConfig) -> BeliefTable:
    c = aggregate_correct_prob(spatial)
    marg = reading_marginal(source, c)
    post = tuple(
        posterior_at_reception(source, c, y) if marg[y] > 0 else stationary_dist(source)
        for y in (0, 1)
    )
    return BeliefTable(post, marg, c)


def conditional_entropy_h(source: SourceParams, c: float, y: int, delta: int) -> float:
    """Entropy in bits of the current state given reading ``y`` aged ``delta``."""
    return entropy(evolve(posterior_at_reception(source, c, y), source, delta))


def h_curve(source: SourceParams, c: float, y: int, depth: int) -> np.ndarray:
    """``h(y, delta)`` for ``delta = 0 .. depth``."""
    p1_reset = posterior_at_reception(source, c, y).p1
    return binary_entropy(evolve_p1(p1_reset, source, np.arange(depth + 1)))


@dataclass(frozen=True)
class Truncation:
    """How the infinite sum over ages is cut.

    ``tail_depth`` is the smallest age with tail mass below ``TAIL_TOL``;
    ``convergence_depth`` the smallest age past which ``h`` equals the
    source entropy to about 1e-12 bit (``None`` if it never settles).
    Ages ``0 .. depth`` are enumerated; everything beyond is given the
    source entropy with total mass ``tail_mass``.
    """

    tail_depth: int
    convergence_depth: int | None
    depth: int
    tail_mass: float

    @property
    def delta_max(self) -> int:
        """Age by which both the tail mass is negligible and ``h`` has settled."""
        if self.convergence_depth is None:
            return self.tail_depth
        return max(self.tail_depth, self.convergence_depth)


def tail_depth(p_s: float, tol: float = TAIL_TOL) -> int:
    """Smallest ``d`` with ``(1 - p_s)^(d + 1) < tol``."""
    if not (0.0 < p_s <= 1.0):
        raise ValueError(f"age of information has no stationary law for p_s={p_s}")
    if p_s == 1.0:
        return 0
    log_fail = math.log1p(-p_s)
    x = math.log(tol) / log_fail
    d = max(0, math.ceil(x) - 1)
    if d > 2**40:
        # unit steps are below float resolution here; the estimate is exact enough
        return d
    while (d + 1) * log_fail >= math.log(tol):
        d += 1
    while d > 0 and d * log_fail < math.log(tol):
        d -= 1
    return d


def convergence_depth(source: SourceParams, c: float) -> int | None:
    pi1 = stationary_dist(source).p1
    amp = max(abs(posterior_at_reception(source, c, y).p1 - pi1) for y in (0, 1))
    tol = 1e-14 * min(pi1, 1.0 - pi1)
    if amp <= tol:
        return 0
    mu = abs(source.mu)
    if mu == 0.0:
        return 1
    if mu >= 1.0:
        return None
    return int(math.ceil(math.log(tol / amp) / math.log(mu)))


def truncation(source: SourceParams, c: float, p_s: float) -> Truncation:
    td = tail_depth(p_s)
    cd = convergence_depth(source, c)
    depth = td if cd is None else min(td, cd)
    if depth > MAX_DEPTH:
        raise TruncationError(
            f"age series needs {depth} terms (p_s={p_s:.3g}, mu={source.mu:.6g}); "
            f"cap is {MAX_DEPTH}"
        )
    tail_mass = 0.0 if p_s == 1.0 else math.exp((depth + 1) * math.log1p(-p_s))
    return Truncation(td, cd, depth, tail_mass)


def _age_weights(p_s: float, depth: int) -> np.ndarray:
    ages = np.arange(depth + 1, dtype=float)
    if p_s == 1.0:
        return (ages == 0).astype(float)
    return p_s * np.exp(ages * math.log1p(-p_s))


def _check_ps(channel: ChannelConfig) -> float:
    p_s = success_prob(channel)
    if not p_s > 0.0:
        raise ValueError("success probability is zero; the receiver never updates")
    return p_s


@dataclass(frozen=True)
class UncertaintyLaw:
    """Discrete law of ``h(Y, Delta)``: sorted support points and their masses."""

    values: np.ndarray
    masses: np.ndarray
    source_entropy: float
    truncation: Truncation

    def mean(self) -> float:
        return float(np.dot(self.values, self.masses))

    def cdf(self, thresholds) -> np.ndarray:
        w = np.asarray(thresholds, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        idx = np.searchsorted(self.values, w, side="right")
        return np.minimum(cum[idx], 1.0)

    @property
    def minimum(self) -> float:
        """Smallest uncertainty value carrying positive mass."""
        return float(self.values[np.argmax(self.masses > 0)])


def uncertainty_law(
    source: SourceParams, spatial: SpatialConfig, channel: ChannelConfig
) -> UncertaintyLaw:
    p_s = _check_ps(channel)
    table = belief_table(source, spatial)
    trunc = truncation(source, table.c, p_s)
    h_inf = entropy(stationary_dist(source))
    weights = _age_weights(p_s, trunc.depth)
    values, masses = [], []
    for y in (0, 1):
        py = table.reading_marginal[y]
        if py <= 0.0:
            continue
        values.append(h_curve(source, table.c, y, trunc.depth))
        masses.append(py * weights)
    values.append(np.array([h_inf]))
    masses.append(np.array([trunc.tail_mass]))
    values = np.concatenate(values)
    masses = np.concatenate(masses)
    order = np.argsort(values, kind="stable")
    return UncertaintyLaw(values[order], masses[order], h_inf, trunc)


def avg_conditional_entropy(
    source: SourceParams, spatial: SpatialConfig, channel: ChannelConfig
) -> float:
    """Average uncertainty ``H(X | Y, Delta)`` in bits."""
    p_s = _check_ps(channel)
    table = belief_table(source, spatial)
    trunc = truncation(source, table.c, p_s)
    weights = _age_weights(p_s, trunc.depth)
    total = trunc.tail_mass * entropy(stationary_dist(source))
    for y in (0, 1):
        py = table.reading_marginal[y]
        if py > 0.0:
            total += py * float(np.dot(weights, h_curve(source, table.c, y, trunc.depth)))
    return min(max(total, 0.0), 1.0)


def uncertainty_cdf(
    source: SourceParams, spatial: SpatialConfig, channel: ChannelConfig, thresholds
) -> np.ndarray:
    """``P(h(Y, Delta) <= w)`` for every threshold ``w``."""
    return uncertainty_law(source, spatial, channel).cdf(thresholds)
