"""Solver for risk-sensitive semi-Markov decision processes with
discounted cost and general utilities.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from smdp_risk._core import (
    Certificate,
    Estimate,
    ExponentialResult,
    FiniteResult,
    Grid,
    GridBudget,
    Model,
    ModelParseError,
    NoCertificateError,
    NonConvergenceError,
    Policy,
    Quadrature,
    SolveResult,
    Trajectory,
    Utility,
    Values,
    build_grid,
    build_quadrature,
    default_truncation_depth,
    error_bound,
    estimate_value,
    evaluate_markov_policy,
    evaluate_stationary,
    improve_policy,
    sample_trajectory,
    solve_exponential,
    solve_finite,
    solve_infinite,
    splitting_residual,
)

__all__ = [
    "Certificate",
    "Estimate",
    "ExponentialResult",
    "FiniteResult",
    "Grid",
    "GridBudget",
    "Model",
    "ModelParseError",
    "NoCertificateError",
    "NonConvergenceError",
    "Policy",
    "Quadrature",
    "SolveResult",
    "Trajectory",
    "Utility",
    "Values",
    "build_grid",
    "build_quadrature",
    "default_truncation_depth",
    "error_bound",
    "estimate_value",
    "evaluate_markov_policy",
    "evaluate_stationary",
    "improve_policy",
    "sample_trajectory",
    "solve_exponential",
    "solve_finite",
    "solve_infinite",
    "splitting_residual",
]

__version__ = "0.1.0"
