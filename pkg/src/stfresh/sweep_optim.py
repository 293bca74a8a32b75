"""Entropy-versus-radius curves and the radius minimising average uncertainty."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .belief import aggregate_correct_prob, avg_conditional_entropy
from .channel import aoi_optimal_radius, success_prob
from .config import AccessConfig, ExperimentConfig
from .errors import ConfigError
from .source import SourceParams
from .spatial import SpatialConfig

log = logging.getLogger(__name__)

SWEEPABLE = ("K", "eta", "alpha", "zeta", "epsilon", "q")


@dataclass(frozen=True)
class CurvePoint:
    K: int
    R_m: float
    H: float
    p_s: float
    c: float


@dataclass(frozen=True)
class OptResult:
    K_star: int
    R_m_star: float
    H_star: float
    R_aoi: float
    curve: list[CurvePoint]
    R_aoi_printed: float = math.nan


@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: tuple[float, ...]
    base: ExperimentConfig
    k_max: int | None = None

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.param!r}; choose from {SWEEPABLE}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ConfigError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        if self.param == "K" and any(v != int(v) or v < 1 for v in grid):
            raise ConfigError("K grid must hold positive integers")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class SweepRow:
    value: float
    K_star: int
    R_m_star: float
    H_star: float
    R_aoi: float
    R_aoi_printed: float


@dataclass
class SweepTable:
    param: str
    rows: list[SweepRow]
    diagnostics: dict[str, bool] = field(default_factory=dict)


def evaluate(config: ExperimentConfig) -> CurvePoint:
    chan = config.channel_config()
    H = avg_conditional_entropy(config.source, config.spatial, chan)
    return CurvePoint(
        config.spatial.num_rings,
        config.spatial.radius,
        H,
        success_prob(chan),
        aggregate_correct_prob(config.spatial),
    )


def entropy_vs_radius(config: ExperimentConfig, k_range) -> list[CurvePoint]:
    ks = [int(k) for k in k_range]
    if not ks:
        raise ConfigError("empty range of ring counts")
    if min(ks) < 1:
        raise ConfigError("ring counts must be positive")
    return [evaluate(config.with_rings(k)) for k in ks]


def default_k_max(config: ExperimentConfig) -> int:
    r = aoi_optimal_radius(config.spatial.rho, config.channel.zeta,
                           config.channel.epsilon, config.spatial.ring_width)
    return max(1, math.ceil(2.0 * r.radius / config.spatial.ring_width))


def optimal_radius(config: ExperimentConfig, k_max: int | None = None) -> OptResult:
    """Exhaustive scan over ``K = 1..k_max``; ties go to the smaller radius."""
    if k_max is None:
        k_max = default_k_max(config)
    if k_max < 1:
        raise ConfigError("k_max must be at least 1")
    curve = entropy_vs_radius(config, range(1, k_max + 1))
    # argmin returns the first minimum, i.e. the smallest K among ties
    best = curve[int(np.argmin([p.H for p in curve]))]
    aoi = aoi_optimal_radius(config.spatial.rho, config.channel.zeta,
                             config.channel.epsilon, config.spatial.ring_width)
    return OptResult(best.K, best.R_m, best.H, aoi.radius, curve, aoi.printed_formula)


def apply_param(config: ExperimentConfig, param: str, value: float) -> ExperimentConfig:
    src, sp, ch = config.source, config.spatial, config.channel
    if param == "eta":
        return replace(config, source=SourceParams(src.q, value))
    if param == "q":
        return replace(config, source=SourceParams(value, src.eta))
    if param == "alpha":
        return replace(config, spatial=SpatialConfig(sp.ring_width, sp.num_rings, sp.rho, value, sp.law))
    if param == "zeta":
        return replace(config, channel=AccessConfig(value, ch.epsilon))
    if param == "epsilon":
        return replace(config, channel=AccessConfig(ch.zeta, value))
    if param == "K":
        return config.with_rings(int(value))
    raise ConfigError(f"cannot sweep {param!r}")


def _monotone(values, increasing: bool) -> bool:
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    return bool(np.all(d >= 0) if increasing else np.all(d <= 0))


def sweep(spec: SweepSpec) -> SweepTable:
    """One optimal-radius solve per grid value.

    Sweeping ``K`` itself pins the ring count at each grid value instead of
    optimising over it.
    """
    rows = []
    for value in spec.grid:
        cfg = apply_param(spec.base, spec.param, value)
        if spec.param == "K":
            pt = evaluate(cfg)
            aoi = aoi_optimal_radius(cfg.spatial.rho, cfg.channel.zeta,
                                     cfg.channel.epsilon, cfg.spatial.ring_width)
            rows.append(SweepRow(value, pt.K, pt.R_m, pt.H, aoi.radius, aoi.printed_formula))
            continue
        res = optimal_radius(cfg, spec.k_max)
        rows.append(SweepRow(value, res.K_star, res.R_m_star, res.H_star, res.R_aoi, res.R_aoi_printed))
    diagnostics = {
        "R_m_star_nondecreasing": _monotone([r.R_m_star for r in rows], True),
        "R_m_star_nonincreasing": _monotone([r.R_m_star for r in rows], False),
        "H_star_nondecreasing": _monotone([r.H_star for r in rows], True),
        "H_star_nonincreasing": _monotone([r.H_star for r in rows], False),
    }
    for name, ok in diagnostics.items():
        log.debug("sweep over %s: %s = %s", spec.param, name, ok)
    return SweepTable(spec.param, rows, diagnostics)
