"""Chartist-fundamentalist stock market as a piecewise-linear discontinuous map."""

from .analysis import (
    ClassifierConfig,
    ClassLabel,
    attractor_pair_check,
    classify_region,
    classify_trajectory,
    cycle_scan,
    f_subregion,
    fundamental_line_check,
    immediate_basin,
    in_immediate_basin,
    lyapunov_max,
    preimage_triangles,
)
from .core import (
    Branch,
    ModelParams,
    ParameterError,
    RawParams,
    State,
    branch_of,
    c_closed_form,
    c_limit,
    eigen,
    inverse_outer,
    iterate,
    jacobian,
    price_space_step,
    step_c,
    step_f,
    step_m,
)
from .grids import (
    GridSpec2D,
    compute_basin_grid,
    compute_bifurcation_grid,
    grid_stats,
)
from .stochastic import (
    ShockConfig,
    normal_stream,
    regime_labels,
    regime_stats,
    simulate_stochastic,
)

__all__ = [
    "Branch",
    "ClassLabel",
    "ClassifierConfig",
    "GridSpec2D",
    "ModelParams",
    "ParameterError",
    "RawParams",
    "ShockConfig",
    "State",
    "attractor_pair_check",
    "branch_of",
    "c_closed_form",
    "c_limit",
    "classify_region",
    "classify_trajectory",
    "compute_basin_grid",
    "compute_bifurcation_grid",
    "cycle_scan",
    "eigen",
    "f_subregion",
    "fundamental_line_check",
    "grid_stats",
    "immediate_basin",
    "in_immediate_basin",
    "inverse_outer",
    "iterate",
    "jacobian",
    "lyapunov_max",
    "normal_stream",
    "preimage_triangles",
    "price_space_step",
    "regime_labels",
    "regime_stats",
    "simulate_stochastic",
    "step_c",
    "step_f",
    "step_m",
]

__version__ = "0.1.0"
