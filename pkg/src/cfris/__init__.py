"""Simulator and optimizer for a wideband cell-free downlink assisted by
active reflecting surfaces, with low-resolution DACs at the access points.

The package splits into scenario construction (config, channel), design
evaluation (quantization, metrics), the conic solver backend (cones), the
alternating optimizer (optimizer), and experiment plumbing (harness,
validation, cli).
"""

from .channel import (ChannelSet, FrequencyGrid, Geometry, antenna_gain,
                      generate_channels, path_loss, place_nodes, seeded_rng,
                      subcarrier_frequencies, ula_response, upa_response)
from .config import (SystemConfig, dbm_to_watt, default_config, desk_config,
                     load_config, profile_config, save_config, watt_to_dbm)
from .cones import (ConeBlock, ConicProgram, ConicSolution, ProgramBuilder,
                    embed_complex_quadratic, solve)
from .harness import (METHODS, ResultRow, SweepSpec, apply_method, run_sweep,
                      run_trial, trial_seed)
from .metrics import (DesignVariables, Metrics, NoiseModel, PowerBreakdown,
                      Residuals, evaluate, feasibility_residuals)
from .optimizer import (OptimizationPlan, OptimizeResult, SolveTrace,
                        SolverOptions, initialize, mmse_filters, optimize,
                        update_tau)
from .quantization import DacModel, distortion_factor
from .validation import run_all_checks

__version__ = "0.1.0"

__all__ = [
    "ChannelSet", "FrequencyGrid", "Geometry", "antenna_gain",
    "generate_channels", "path_loss", "place_nodes", "seeded_rng",
    "subcarrier_frequencies", "ula_response", "upa_response",
    "SystemConfig", "dbm_to_watt", "default_config", "desk_config",
    "load_config", "profile_config", "save_config", "watt_to_dbm",
    "ConeBlock", "ConicProgram", "ConicSolution", "ProgramBuilder",
    "embed_complex_quadratic", "solve",
    "METHODS", "ResultRow", "SweepSpec", "apply_method", "run_sweep",
    "run_trial", "trial_seed",
    "DesignVariables", "Metrics", "NoiseModel", "PowerBreakdown", "Residuals",
    "evaluate", "feasibility_residuals",
    "OptimizationPlan", "OptimizeResult", "SolveTrace", "SolverOptions",
    "initialize", "mmse_filters", "optimize", "update_tau",
    "DacModel", "distortion_factor",
    "run_all_checks",
    "__version__",
]
