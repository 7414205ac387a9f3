"""Regularized hard thresholding pursuit: solvers, analysis checks and experiment harness."""

from ._core import (
    ArgumentError,
    BudgetError,
    InapplicableError,
    InvalidRegularizerError,
    PreconditionError,
    SingularityError,
    analyze,
    estimate_ric,
    generate_instance,
    hard_threshold,
    preset,
    psi,
    psi_inverse,
    restricted_least_squares,
    run,
    run_sweep,
)

__all__ = [
    "ArgumentError",
    "BudgetError",
    "InapplicableError",
    "InvalidRegularizerError",
    "PreconditionError",
    "SingularityError",
    "analyze",
    "estimate_ric",
    "generate_instance",
    "hard_threshold",
    "preset",
    "psi",
    "psi_inverse",
    "restricted_least_squares",
    "run",
    "run_sweep",
]
