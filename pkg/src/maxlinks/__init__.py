"""Concurrent-link capacity bound for MIMO ad hoc networks.

For a network of randomly placed transmit/receive pairs sharing one band,
this package computes the largest subset of pairs that can transmit
simultaneously while every pair holds a minimum MMSE SINR under a per-pair
power cap, and averages that bound over seeded Monte Carlo realizations.
"""

from ._version import __version__
from .errors import NumericError, ParameterError
from .fitting import FitParams, fit_two_stage
from .harness import (Cell, CellAggregate, ExperimentConfig, RunResult,
                      TrialRecord, run_one_trial, run_trials,
                      validate_equivalence)
from .mimo import (EffectiveChannel, Scheme, SchemeConfig, beamforming_weight,
                   effective_channel, generic_sinr, interference_covariance,
                   mmse_sinr, mmse_weight, stbc_stack)
from .power import (FeasibilityResult, InfeasibleCause, determine_feasibility,
                    is_supported, power_step)
from .reporting import emit_report, load_config_file
from .scenario import (ChannelSet, Scenario, SimParams, Topology,
                       build_scenario, db_to_linear, dbm_to_mw, linear_to_db,
                       mw_to_dbm, noise_power, path_gain, sample_channels,
                       sample_topology, scenario_from_json, trial_rng)
from .selection import (SelectionResult, backtracking_search,
                        exhaustive_search, feasibility_oracle, next_pair_set,
                        select_max_links, Direction)

__all__ = [
    "__version__",
    "ParameterError", "NumericError",
    "SimParams", "Topology", "ChannelSet", "Scenario",
    "sample_topology", "path_gain", "noise_power", "sample_channels",
    "build_scenario", "scenario_from_json", "trial_rng",
    "db_to_linear", "linear_to_db", "dbm_to_mw", "mw_to_dbm",
    "Scheme", "SchemeConfig", "EffectiveChannel", "effective_channel",
    "beamforming_weight", "stbc_stack", "interference_covariance",
    "mmse_weight", "mmse_sinr", "generic_sinr",
    "FeasibilityResult", "InfeasibleCause", "determine_feasibility",
    "is_supported", "power_step",
    "Direction", "SelectionResult", "next_pair_set", "backtracking_search",
    "exhaustive_search", "feasibility_oracle", "select_max_links",
    "ExperimentConfig", "Cell", "TrialRecord", "CellAggregate", "RunResult",
    "run_one_trial", "run_trials", "validate_equivalence",
    "FitParams", "fit_two_stage",
    "emit_report", "load_config_file",
]
