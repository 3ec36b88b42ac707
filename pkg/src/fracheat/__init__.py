"""fracheat: controlled fractional heat equation on (-1, 1).

P1 finite-element discretization of the fractional Laplacian with
exterior Dirichlet condition, time marching schemes that preserve
positivity, spectral and observability diagnostics, and control
synthesis with nonnegativity constraints, including minimal-horizon
estimation by bisection.
"""

from .assembly import (
    DiscreteOperator,
    assemble_mass,
    assemble_stiffness,
    build_operator,
    export_matrix_csv,
    normalization_constant,
)
from .config import HorizonMode, ScenarioConfig, parse_config, preset_fields
from .control import (
    AtomicityReport,
    ControlProblem,
    FixedTimeOutcome,
    MinimalTimeReport,
    control_to_csv,
    impulse_analysis,
    make_problem,
    minimal_time_report_to_json,
    minimal_time_search,
    solve_constrained_fixed_time,
    solve_unconstrained_Linf,
    sufficient_time_bound,
    unconstrained_dual_details,
)
from .dynamics import (
    ControlField,
    PositivityReport,
    Trajectory,
    duhamel_spectral,
    generate_target_trajectory,
    make_control,
    positivity_check,
    simulate,
    trajectory_to_csv,
)
from .errors import CFLError, ConfigError, FracheatError, QuadratureError, SolverError
from .grid import Grid, build_grid, nodes_in_interval, trapezoid_weights
from .scenario import ScenarioResult, build_problem_from_config, run_scenario
from .observability import (
    BlowupCurve,
    ExponentialSum,
    ObservabilityEstimate,
    adjoint_observability_ratio,
    blowup_curve,
    blowup_curve_to_csv,
    estimate_observability_constant,
    l1_norm_exp_sum,
)
from .spectral import (
    GapReport,
    QuasiEigenfunction,
    SpectralBasis,
    G_transform,
    eigendecompose,
    flattening_ratio,
    gamma_density,
    gap_statistics,
    l1_lower_bound,
    lambda_asymptotic,
    mu_value,
    q_profile,
    quasi_eigenfunction,
    spectral_report,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicityReport",
    "BlowupCurve",
    "CFLError",
    "ConfigError",
    "ControlField",
    "ControlProblem",
    "DiscreteOperator",
    "ExponentialSum",
    "FixedTimeOutcome",
    "FracheatError",
    "G_transform",
    "GapReport",
    "Grid",
    "HorizonMode",
    "MinimalTimeReport",
    "ObservabilityEstimate",
    "PositivityReport",
    "QuadratureError",
    "QuasiEigenfunction",
    "ScenarioConfig",
    "ScenarioResult",
    "SolverError",
    "SpectralBasis",
    "Trajectory",
    "adjoint_observability_ratio",
    "assemble_mass",
    "assemble_stiffness",
    "blowup_curve",
    "blowup_curve_to_csv",
    "build_grid",
    "build_operator",
    "build_problem_from_config",
    "control_to_csv",
    "duhamel_spectral",
    "eigendecompose",
    "estimate_observability_constant",
    "export_matrix_csv",
    "flattening_ratio",
    "gamma_density",
    "gap_statistics",
    "generate_target_trajectory",
    "impulse_analysis",
    "l1_lower_bound",
    "l1_norm_exp_sum",
    "lambda_asymptotic",
    "make_control",
    "make_problem",
    "minimal_time_report_to_json",
    "minimal_time_search",
    "mu_value",
    "nodes_in_interval",
    "normalization_constant",
    "parse_config",
    "positivity_check",
    "preset_fields",
    "q_profile",
    "quasi_eigenfunction",
    "run_scenario",
    "simulate",
    "solve_constrained_fixed_time",
    "solve_unconstrained_Linf",
    "spectral_report",
    "sufficient_time_bound",
    "trajectory_to_csv",
    "trapezoid_weights",
    "unconstrained_dual_details",
    "__version__",
]
