"""Independent re-evaluation of a candidate assignment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import ConeProblem, Solution


@dataclass
class AuditReport:
    worst_violation: float
    violations: dict = field(default_factory=dict)
    objective: float = float("nan")

    def ok(self, tol: float) -> bool:
        return self.worst_violation <= tol


def validate_solution(problem: ConeProblem, solution: Solution, tolerance: float = 1e-6) -> AuditReport:
    """Recheck every constraint of ``problem`` at ``solution``.

    PSD-ness is checked through eigenvalues. The reported objective is what
    the assignment actually achieves: for a maximized variable bounded by
    hypographs, the smallest right-hand side among them.
    """
    x, W = solution.scalars, solution.matrices
    v = {}
    for k, nonneg in problem.scalars.items():
        if nonneg:
            v[f"nonneg[{k}]"] = max(0.0, -x[k])
    for i, con in enumerate(problem.linear):
        val = con.expr.evaluate(x, W)
        v[f"linear[{con.name or i}]"] = abs(val) if con.sense == "==" else max(0.0, val)
    for m in problem.matrices:
        M = W[m]
        v[f"hermitian[{m}]"] = float(np.abs(M - M.conj().T).max())
        v[f"psd[{m}]"] = max(0.0, -float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0]))
    for p in problem.pins:
        d = np.real(np.diag(W[p.matrix]))
        v[f"pin[{p.matrix}]"] = float(np.abs(d - x[p.scalar]).max())
    rhs_obj = []
    for i, h in enumerate(problem.hypographs):
        rhs = h.rhs(x, W)
        v[f"hypograph[{h.name or i}]"] = max(0.0, x[h.var] - rhs)
        if h.var == problem.objective:
            rhs_obj.append(rhs)
    obj = min(rhs_obj) if rhs_obj else x[problem.objective]
    worst = max(v.values()) if v else 0.0
    return AuditReport(worst, v, float(obj))
