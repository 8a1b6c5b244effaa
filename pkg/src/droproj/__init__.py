"""Worst-case distributions over divergence and norm balls, and projections
onto box-constrained simplices, computed through scalar root finding."""

from .bench import BenchRecord, PowerFit, fit_power_law, generate_instance, run_bench
from .box_simplex import solve_box_simplex
from .core import (
    BoxSimplexInstance,
    Distance,
    Distribution,
    DroError,
    DroInstance,
    SolverResult,
    Status,
    ValidationError,
)
from .divergence import divergence
from .dro_norm import solve_dro_norm
from .dro_phi import solve_dro_phi
from .oracle import GridConfig, grid_solve, residuals
from .rootfind import RootConfig, RootFindingError
from .solvers import METHODS, distance, solve

__version__ = "0.1.0"

__all__ = [
    "BenchRecord", "BoxSimplexInstance", "Distance", "Distribution", "DroError", "DroInstance",
    "GridConfig", "METHODS", "PowerFit", "RootConfig", "RootFindingError", "SolverResult", "Status",
    "ValidationError", "distance", "divergence", "fit_power_law", "generate_instance", "grid_solve",
    "residuals", "run_bench", "solve", "solve_box_simplex", "solve_dro_norm", "solve_dro_phi",
]
