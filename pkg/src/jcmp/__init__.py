"""Joint communication-motion planning for a relay-assisted robot network."""

from .channel import (ChannelParams, LinkPlan, ModeTable, TxMode, default_mode_table,
                      load_mode_table, mean_snr, min_link_energy, noise_power, path_gain,
                      per_instant, per_rayleigh, required_mean_snr)
from .cqm import (StepWeightParams, WeightedGraph, algebraic_connectivity, build_graph, capacity,
                  e2e_per, num_simple_paths, step_weight)
from .errors import ConfigError, InfeasibleError
from .motion import MotionParams, motion_energy, reachable
from .planner import (StepDecision, ValueTable, comm_baseline_step, multi_stage_plan,
                      relay_allocation, single_stage_step)
from .scenario import Grid, Scenario, default_scenario, load_scenario
from .simcore import compare, monte_carlo_validate, persist_run, read_runs, run

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "LinkPlan", "ModeTable", "TxMode", "default_mode_table", "load_mode_table",
    "mean_snr", "min_link_energy", "noise_power", "path_gain", "per_instant", "per_rayleigh",
    "required_mean_snr",
    "StepWeightParams", "WeightedGraph", "algebraic_connectivity", "build_graph", "capacity",
    "e2e_per", "num_simple_paths", "step_weight",
    "ConfigError", "InfeasibleError",
    "MotionParams", "motion_energy", "reachable",
    "StepDecision", "ValueTable", "comm_baseline_step", "multi_stage_plan", "relay_allocation",
    "single_stage_step",
    "Grid", "Scenario", "default_scenario", "load_scenario",
    "compare", "monte_carlo_validate", "persist_run", "read_runs", "run",
]
