"""Impulse control of the 1-D heat equation with dynamic boundary conditions.

The library computes minimal-norm impulse controls by a penalized duality
method driven by conjugate gradients, and numerically verifies the
logarithmic-convexity / observability machinery that guarantees such
controls exist: frequency function, explicit constants, the three-point
inequality, and single-time observability fits.
"""

from .config import ConfigError, ExperimentConfig, initial_state, load_config, validate
from .convexity import (
    ConvexityConstants,
    ConvexityReport,
    ObservabilityFit,
    ObservabilitySample,
    ThreePointCheck,
    WeightParams,
    admissible_s_bound,
    bound_satisfied,
    check_admissible,
    convexity_constants,
    epsilon_split_slack,
    fit_observability,
    frequency,
    split_constants,
    three_point_check,
    weighted_state,
    write_frequency_csv,
)
from .evolution import (
    TimeScheme,
    Trajectory,
    evolve,
    evolve_trajectory,
    solve_impulsive,
    steps_for,
)
from .hum import (
    CgBreakdownError,
    CostBoundReport,
    HumConfig,
    HumSolution,
    cg_solve,
    control_op,
    cost_bound_check,
    duality_residual,
    gramian_apply,
    penalized_objective,
    solve_cost_weighted,
    solution_to_dict,
    write_solution_json,
    write_state_csv,
)
from .mesh import (
    Discretization,
    Grid,
    State,
    SubdomainMask,
    build_discretization,
    inner,
    norm,
    subdomain_mask,
    subdomain_norm,
)
from .rng import SplitMix64, random_smooth_state
from .scenarios import (
    RunSummary,
    Table1Row,
    run_controlled,
    run_convexity,
    run_sweep,
    run_table1,
    run_uncontrolled,
)

__version__ = "0.1.0"

__all__ = [
    "CgBreakdownError",
    "ConfigError",
    "ConvexityConstants",
    "ConvexityReport",
    "CostBoundReport",
    "Discretization",
    "ExperimentConfig",
    "Grid",
    "HumConfig",
    "HumSolution",
    "ObservabilityFit",
    "ObservabilitySample",
    "RunSummary",
    "SplitMix64",
    "State",
    "SubdomainMask",
    "Table1Row",
    "ThreePointCheck",
    "TimeScheme",
    "Trajectory",
    "WeightParams",
    "admissible_s_bound",
    "bound_satisfied",
    "build_discretization",
    "cg_solve",
    "check_admissible",
    "control_op",
    "convexity_constants",
    "cost_bound_check",
    "duality_residual",
    "epsilon_split_slack",
    "evolve",
    "evolve_trajectory",
    "fit_observability",
    "frequency",
    "gramian_apply",
    "initial_state",
    "inner",
    "load_config",
    "norm",
    "penalized_objective",
    "random_smooth_state",
    "run_controlled",
    "run_convexity",
    "run_sweep",
    "run_table1",
    "run_uncontrolled",
    "solution_to_dict",
    "solve_cost_weighted",
    "solve_impulsive",
    "split_constants",
    "steps_for",
    "subdomain_mask",
    "subdomain_norm",
    "three_point_check",
    "validate",
    "weighted_state",
    "write_frequency_csv",
    "write_solution_json",
    "write_state_csv",
]
