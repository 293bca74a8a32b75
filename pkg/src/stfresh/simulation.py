"""Slot-level Monte-Carlo simulation over static topologies.

Each run places ``m`` nodes once, then plays out the source chain, the
slotted ALOHA channel and the receiver's (reading, age) state slot by slot.
The receiver evaluates its uncertainty with the ensemble correct-reading
probability, as it cannot tell which ring a packet came from.

Random streams: a run seed feeds ``numpy.random.SeedSequence``, which is
split into four independent PCG64 streams (topology, source, channel,
reading errors).  Run ``i`` of a batch uses the seed
``SeedSequence([base_seed, i]).generate_state(1, uint64)[0]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .belief import aggregate_correct_prob, h_curve
from .config import ExperimentConfig
from .errors import ConfigError
from .source import SourceParams, entropy, stationary_dist
from .spatial import reliability_table, sample_region, simulation_node_count

NAIVE_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class Topology:
    ring_index: np.ndarray
    seed: int

    def occupancy(self, num_rings: int) -> np.ndarray:
        """Fraction of nodes per ring."""
        counts = np.bincount(self.ring_index, minlength=num_rings)
        return counts / max(self.ring_index.size, 1)


@dataclass
class SimResult:
    time_avg_h: float
    empirical_ps: float
    empirical_aoi_mean: float
    reception_count: int
    seed: int
    m_sim: int
    flip_count: int
    realized_c: float
    """Occupancy-weighted reliability of this particular topology."""
    h_samples: list[tuple[int, float]] | None = None


@dataclass
class Trace:
    """Per-slot record of one run. Warm-up slots carry ``y = delta = -1``."""

    topology: Topology
    state: np.ndarray
    reception: np.ndarray
    reading: np.ndarray
    delta: np.ndarray
    h: np.ndarray
    sender_ring: np.ndarray
    flipped: np.ndarray


class TimelinePoint(NamedTuple):
    slot: int
    h: float
    y: int | None
    delta: int | None
    reception: bool


def derive_seed(base_seed: int, run: int) -> int:
    """Seed of run ``run`` in a batch started from ``base_seed``."""
    ss = np.random.SeedSequence([int(base_seed), int(run)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _streams(seed: int):
    children = np.random.SeedSequence(int(seed)).spawn(4)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def source_trace(params: SourceParams, num_slots: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a path of the two-state chain started from its stationary law.

    Sojourn times are geometric, so the path is assembled from alternating
    run lengths instead of one draw per slot.
    """
    x0 = int(rng.random() < stationary_dist(params).p1)
    if params.q == 0.0:
        return np.full(num_slots, x0, dtype=np.int8)
    leave = (params.q, params.eta * params.q)
    mean_pair = 1.0 / leave[0] + 1.0 / leave[1]
    batch = int(num_slots / mean_pair) + 16
    lengths = []
    total = 0
    start = x0
    while total < num_slots:
        a = rng.geometric(leave[start], size=batch)
        b = rng.geometric(leave[1 - start], size=batch)
        pair = np.empty(2 * batch, dtype=np.int64)
        pair[0::2], pair[1::2] = a, b
        lengths.append(pair)
        total += int(pair.sum())
    lengths = np.concatenate(lengths)
    states = (np.arange(lengths.size) + x0) % 2
    return np.repeat(states.astype(np.int8), lengths)[:num_slots]


def reference_source_trace(params: SourceParams, num_slots: int, rng: np.random.Generator) -> np.ndarray:
    """Slot-by-slot sampling of the chain; slow, used to cross-check ``source_trace``."""
    a = np.array([[1 - params.q, params.q], [params.eta * params.q, 1 - params.eta * params.q]])
    x = np.empty(num_slots, dtype=np.int8)
    s = int(rng.random() < stationary_dist(params).p1)
    u = rng.random(num_slots)
    for n in range(num_slots):
        if n > 0:
            s = int(u[n] < a[s, 1])
        x[n] = s
    return x


def _channel_binomial(m: int, zeta: float, epsilon: float, num_slots: int, rng):
    g = zeta * (1.0 - epsilon)
    counts = rng.binomial(m, g, size=num_slots)
    slots = np.flatnonzero(counts == 1)
    sender = rng.integers(0, m, size=slots.size)
    return slots, sender


def _channel_naive(m: int, zeta: float, epsilon: float, num_slots: int, rng):
    """One transmit and one erasure draw per node per slot."""
    chunk = max(1, NAIVE_CHUNK_CELLS // max(m, 1))
    slots, senders = [], []
    for start in range(0, num_slots, chunk):
        n = min(chunk, num_slots - start)
        tx = rng.random((n, m)) < zeta
        kept = rng.random((n, m)) >= epsilon
        arrived = tx & kept
        ok = np.flatnonzero(arrived.sum(axis=1) == 1)
        slots.append(ok + start)
        senders.append(np.argmax(arrived[ok], axis=1))
    return np.concatenate(slots), np.concatenate(senders)


_CHANNELS = {"binomial": _channel_binomial, "naive": _channel_naive}


def simulate_trace(config: ExperimentConfig, seed: int, num_slots: int | None = None,
                   method: str = "binomial") -> Trace:
    if method not in _CHANNELS:
        raise ConfigError(f"unknown channel sampling method {method!r}")
    n = config.sim.slots if num_slots is None else int(num_slots)
    if n < 1:
        raise ConfigError("number of slots must be positive")
    spatial, source = config.spatial, config.source
    m = simulation_node_count(spatial)
    rng_topo, rng_src, rng_chan, rng_read = _streams(seed)

    topo = Topology(sample_region(spatial, rng_topo, size=m), int(seed))
    x = source_trace(source, n, rng_src)
    rx_slots, sender = _CHANNELS[method](m, config.channel.zeta, config.channel.epsilon, n, rng_chan)

    ring = topo.ring_index[sender]
    lam = reliability_table(spatial)[ring]
    flipped = rng_read.random(rx_slots.size) >= lam
    y_rx = np.where(flipped, 1 - x[rx_slots], x[rx_slots]).astype(np.int8)

    reception = np.zeros(n, dtype=bool)
    reception[rx_slots] = True
    last = np.cumsum(reception) - 1
    seen = last >= 0
    slot_idx = np.arange(n)
    delta = np.full(n, -1, dtype=np.int64)
    reading = np.full(n, -1, dtype=np.int8)
    delta[seen] = slot_idx[seen] - rx_slots[last[seen]]
    reading[seen] = y_rx[last[seen]]

    h = np.full(n, entropy(stationary_dist(source)))
    if rx_slots.size:
        c = aggregate_correct_prob(spatial)
        depth = int(delta.max())
        table = np.stack([h_curve(source, c, y, depth) for y in (0, 1)])
        h[seen] = table[reading[seen], delta[seen]]
    return Trace(topo, x, reception, reading, delta, h, ring, flipped)


def _summarise(trace: Trace, lam: np.ndarray, seed: int, decimation: int | None) -> SimResult:
    n = trace.h.size
    seen = trace.delta >= 0
    occ = trace.topology.occupancy(lam.size)
    samples = None
    if decimation:
        idx = np.arange(0, n, decimation)
        samples = [(int(i), float(trace.h[i])) for i in idx]
    return SimResult(
        time_avg_h=float(trace.h.mean()),
        empirical_ps=float(trace.reception.mean()),
        empirical_aoi_mean=float(trace.delta[seen].mean()) if seen.any() else math.nan,
        reception_count=int(trace.reception.sum()),
        seed=int(seed),
        m_sim=int(trace.topology.ring_index.size),
        flip_count=int(trace.flipped.sum()),
        realized_c=float(np.dot(occ, lam)),
        h_samples=samples,
    )


def run(config: ExperimentConfig, seed: int, num_slots: int | None = None,
        method: str = "binomial", keep_samples: bool = False) -> SimResult:
    trace = simulate_trace(config, seed, num_slots, method)
    lam = reliability_table(config.spatial)
    return _summarise(trace, lam, seed, config.sim.trace_decimation if keep_samples else None)


@dataclass
class BatchResult:
    mean: float
    stderr: float
    runs: list[SimResult]


def _run_indexed(args):
    config, base_seed, i, slots = args
    return run(config, derive_seed(base_seed, i), slots)


def run_batch(config: ExperimentConfig, num_topologies: int | None = None,
              slots_per_run: int | None = None, base_seed: int | None = None,
              jobs: int = 1) -> BatchResult:
    """Independent runs over fresh topologies; mean and standard error of the time-average uncertainty."""
    k = config.sim.topologies if num_topologies is None else int(num_topologies)
    if k < 1:
        raise ConfigError("num_topologies must be at least 1")
    slots = config.sim.slots if slots_per_run is None else int(slots_per_run)
    base = config.sim.base_seed if base_seed is None else int(base_seed)
    tasks = [(config, base, i, slots) for i in range(k)]
    if jobs > 1 and k > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_indexed, tasks))
    else:
        runs = [_run_indexed(t) for t in tasks]
    values = np.array([r.time_avg_h for r in runs])
    stderr = float(values.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return BatchResult(float(values.mean()), stderr, runs)


def timeline(config: ExperimentConfig, seed: int, num_slots: int) -> list[TimelinePoint]:
    trace = simulate_trace(config, seed, num_slots)
    out = []
    for i in range(trace.h.size):
        d = int(trace.delta[i])
        out.append(TimelinePoint(
            i, float(trace.h[i]),
            int(trace.reading[i]) if d >= 0 else None,
            d if d >= 0 else None,
            bool(trace.reception[i]),
        ))
    return out
