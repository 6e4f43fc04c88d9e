"""Signalling load of a single UE's RRC state machine, and of a storm of them."""

from sigstorm.model import (
    INFINITE,
    UMTS_COSTS,
    ModelParams,
    SignallingCosts,
    State,
    TransitionTable,
    build_transition_table,
    pch_disabled_projection,
    validate_params,
)
from sigstorm.analytic import (
    LoadReport,
    StationaryDistribution,
    core_load,
    evaluate_loads,
    occupancy_fractions,
    radio_load,
    stationary_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "UMTS_COSTS",
    "ModelParams",
    "SignallingCosts",
    "State",
    "TransitionTable",
    "build_transition_table",
    "pch_disabled_projection",
    "validate_params",
    "LoadReport",
    "StationaryDistribution",
    "core_load",
    "evaluate_loads",
    "occupancy_fractions",
    "radio_load",
    "stationary_distribution",
]
