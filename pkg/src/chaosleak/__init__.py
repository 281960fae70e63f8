"""Chaotic-map toolkit: orbits, regimes, information measures and leakage attacks."""

from .errors import ChaosLeakError, ComputationError, ValidationError
from .maps import HENON, LOGISTIC, REGISTRY, SKEW_TENT, MapModel, get_map, iterate, jacobian
from .orbit import Orbit, detect_cycle, generate_orbit, sample_orbit
from .regimes import (
    Regime,
    bifurcation_diagram,
    classify_regime,
    lyapunov_1d,
    lyapunov_spectrum,
    regime_grid,
)
from .estimate import (
    build_histogram,
    consecutive_pair_invert,
    return_map_estimate,
    wootters_distance,
    wootters_estimate,
)
from .infometrics import (
    complexity_sweep,
    mre,
    ordinal_distribution,
    permutation_entropy,
    statistical_complexity,
)
from .symbolic import encode_itinerary, estimate_mu, estimate_x0, unimodal_compare

__version__ = "0.1.0"
