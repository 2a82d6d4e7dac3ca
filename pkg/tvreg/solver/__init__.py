"""Lagged-diffusivity solver for the regularized Neumann problem."""

from tvreg.solver.config import FACE_SCHEMES, SolverConfig, geometric_schedule
from tvreg.solver.lagged import (
    ContinuationResult,
    SolveTrace,
    StageResult,
    continuation_solve,
    nonlinear_residual,
    solve_regularized,
)
from tvreg.solver.system import (
    ConditionRow,
    LinearSolution,
    LinearSystem,
    assemble_system,
    condition_sweep,
    face_coefficients,
    face_gradient_squared,
    linear_solve,
    system_from_coefficients,
)

__all__ = [
    "FACE_SCHEMES",
    "ConditionRow",
    "ContinuationResult",
    "LinearSolution",
    "LinearSystem",
    "SolveTrace",
    "SolverConfig",
    "StageResult",
    "assemble_system",
    "condition_sweep",
    "continuation_solve",
    "face_coefficients",
    "face_gradient_squared",
    "geometric_schedule",
    "linear_solve",
    "nonlinear_residual",
    "solve_regularized",
    "system_from_coefficients",
]
