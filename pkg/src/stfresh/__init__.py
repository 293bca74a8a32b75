"""Spatio-temporal information freshness of a forgetful receiver.

A receiver tracks a two-state Markov source through readings from sensors
spread over a disc.  Readings arrive over slotted ALOHA and are less
reliable the farther away the sensor sits.  The package evaluates the
receiver's uncertainty in closed form and checks it against a
slot-level simulation.
"""

from .belief import (
    BeliefTable,
    ReceiverState,
    aggregate_correct_prob,
    avg_conditional_entropy,
    conditional_entropy_h,
    posterior_at_reception,
    reading_marginal,
    uncertainty_cdf,
    uncertainty_law,
)
from .channel import ChannelConfig, aoi_optimal_radius, aoi_pmf, success_prob
from .config import ExperimentConfig
from .errors import ConfigError, TruncationError
from .simulation import SimResult, Topology, run, run_batch, timeline
from .source import Dist2, SourceParams, entropy, evolve, stationary_dist, transition_matrix
from .spatial import SpatialConfig, node_count, region_pmf, reliability, sample_region
from .sweep_optim import OptResult, SweepSpec, entropy_vs_radius, optimal_radius, sweep

__version__ = "0.1.0"
