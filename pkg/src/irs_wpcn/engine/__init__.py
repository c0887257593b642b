"""Convex engine: linear + perspective-log + pinned-diagonal PSD programs."""

from .audit import AuditReport, validate_solution
from .conic import solve_scalar
from .cutting import NotReducible, solve_cutting_plane
from .dense import solve_dense
from .problem import (Affine, ConeProblem, DiagPin, Hypograph, Linear, PerspectiveLogTerm,
                      Solution, SolverSettings, trace, var)


def solve(problem: ConeProblem, settings: SolverSettings = SolverSettings()) -> Solution:
    """Maximize ``problem.objective``; status is optimal, infeasible or numerical-limit."""
    problem.check()
    if not problem.matrices:
        return solve_scalar(problem, settings)
    if settings.method == "dense":
        return solve_dense(problem, settings)
    try:
        return solve_cutting_plane(problem, settings)
    except NotReducible:
        if settings.method == "cutting-plane":
            raise
        return solve_dense(problem, settings)


__all__ = [
    "Affine", "AuditReport", "ConeProblem", "DiagPin", "Hypograph", "Linear", "NotReducible",
    "PerspectiveLogTerm", "Solution", "SolverSettings", "solve", "solve_cutting_plane",
    "solve_dense", "solve_scalar", "trace", "validate_solution", "var",
]
