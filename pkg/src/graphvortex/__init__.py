"""Solvers for Chern-Simons vortex equations on finite weighted graphs.

The package provides the discrete calculus on weighted graphs
(:mod:`graphvortex.graph`), linear solves against the graph Laplacian
(:mod:`graphvortex.linsolve`), the model nonlinearities and vortex data
(:mod:`graphvortex.model`), the monotone iteration solvers with explicit
sub-solutions (:mod:`graphvortex.solver`) and parameter-study helpers
(:mod:`graphvortex.analysis`), plus a command line front end
(:mod:`graphvortex.cli`).
"""

from .analysis import (
    LambdaCBracket,
    SweepRecord,
    decay_rate,
    distributional_error,
    estimate_lambda_c_scalar,
    lambda_sweep,
    sweep_csv_text,
    write_bracket_json,
    write_sweep_csv,
)
from .graph import (
    DisconnectedGraphError,
    WeightedGraph,
    complete_graph,
    lattice_graph,
    load_graph,
    random_graph,
    save_graph,
    torus_graph,
)
from .linsolve import ShiftedSystem, SolverFailure, solve_poisson, solve_shifted
from .model import (
    FOUR_PI,
    ModelParams,
    ScalarVortexSet,
    VortexSet,
    f1,
    f2,
    lipschitz_shift,
    load_scalar_vortices,
    load_system_vortices,
    scalar_f,
    vortex_rhs,
)
from .solver import (
    BackgroundPair,
    IterationOptions,
    IterationReport,
    MaxPrincipleVerdict,
    Outcome,
    background_pair,
    background_scalar,
    check_max_principle,
    check_subsolution,
    iterate_scalar,
    iterate_system,
    lambda_threshold_scalar,
    lambda_threshold_system,
    load_solution,
    residual_scalar,
    residual_system,
    save_solution,
    scalar_defect,
    subsolution_offset_scalar,
    subsolution_offset_system,
    subsolution_scalar,
    subsolution_system,
    system_defect,
)

__version__ = "0.1.0"

__all__ = [
    "BackgroundPair",
    "DisconnectedGraphError",
    "FOUR_PI",
    "IterationOptions",
    "IterationReport",
    "LambdaCBracket",
    "MaxPrincipleVerdict",
    "ModelParams",
    "Outcome",
    "ScalarVortexSet",
    "ShiftedSystem",
    "SolverFailure",
    "SweepRecord",
    "VortexSet",
    "WeightedGraph",
    "background_pair",
    "background_scalar",
    "check_max_principle",
    "check_subsolution",
    "complete_graph",
    "decay_rate",
    "distributional_error",
    "estimate_lambda_c_scalar",
    "f1",
    "f2",
    "iterate_scalar",
    "iterate_system",
    "lambda_sweep",
    "lambda_threshold_scalar",
    "lambda_threshold_system",
    "lattice_graph",
    "lipschitz_shift",
    "load_graph",
    "load_scalar_vortices",
    "load_solution",
    "load_system_vortices",
    "random_graph",
    "residual_scalar",
    "residual_system",
    "save_graph",
    "save_solution",
    "scalar_defect",
    "scalar_f",
    "solve_poisson",
    "solve_shifted",
    "subsolution_offset_scalar",
    "subsolution_offset_system",
    "subsolution_scalar",
    "subsolution_system",
    "sweep_csv_text",
    "system_defect",
    "torus_graph",
    "vortex_rhs",
    "write_bracket_json",
    "write_sweep_csv",
]
