"""Exact analysis of random piecewise-linear interval maps.

Systems of continuous piecewise-linear maps of [0,1] chosen i.i.d. with
rational probabilities: preimage counts, transfer of densities, entropy of
stationary measures, contraction certificates, Ulam discretization and a
construction of two distinct invariant measures for one system.
"""

from .intervals import UNIT, grid_partition, parse_partition
from .measures import (
    ETA,
    LEBESGUE,
    AffineImageMeasure,
    AtomicMeasure,
    CantorStageMeasure,
    MassEnclosure,
    Measure,
    MixtureMeasure,
    PwcDensity,
    RestrictedMeasure,
    SelfSimilarMeasure,
    cdf,
    interval_mass,
    local_pullback,
    nu_bar_upper,
    pushbackward_mass,
    pushforward_pwc,
    sample,
    wasserstein1,
)
from .pwl import Piece, PwlMap, compose, critical_points, eval_map, image_interval, pieces, preimage_intervals, preimage_points
from .rational import Rat, ResourceCapError, ValidationError, parse_rat
from .sds import (
    OrbitPath,
    SdsSystem,
    SemigroupLevel,
    birkhoff_average,
    cesaro_histogram,
    endpoint_mass,
    invariance_residual,
    mix_seed,
    semigroup_expand,
    simulate_orbit,
    transfer_pwc,
)
from .stepfun import StepFunction

__version__ = "0.1.0"
