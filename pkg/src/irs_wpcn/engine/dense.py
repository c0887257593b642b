"""Direct formulation with cvxpy Hermitian variables (small instances).

Memory grows with the fourth power of the matrix size, so this route is
meant for N up to roughly a dozen elements and for cross-checking the
cutting-plane route.
"""

from __future__ import annotations

import math

import cvxpy as cp
import numpy as np

from .problem import Affine, ConeProblem, Solution, SolverSettings

_STATUS = {
    cp.OPTIMAL: "optimal",
    cp.INFEASIBLE: "infeasible",
    cp.INFEASIBLE_INACCURATE: "infeasible",
}


def solve_dense(problem: ConeProblem, settings: SolverSettings = SolverSettings()) -> Solution:
    svars = {k: cp.Variable(nonneg=nn, name=k) for k, nn in problem.scalars.items()}
    mvars = {k: cp.Variable((n, n), hermitian=True, name=k) for k, n in problem.matrices.items()}

    def expr(e: Affine):
        out = e.const
        for k, c in e.scalars.items():
            out = out + c * svars[k]
        for m, a, w in e.traces:
            out = out + w * cp.real(cp.trace(a @ mvars[m]))
        return out

    cons = [W >> 0 for W in mvars.values()]
    for p in problem.pins:
        cons.append(cp.real(cp.diag(mvars[p.matrix])) == svars[p.scalar])
    for con in problem.linear:
        cons.append(expr(con.expr) <= 0 if con.sense == "<=" else expr(con.expr) == 0)
    for h in problem.hypographs:
        rhs = 0
        for t in h.terms:
            tv = svars[t.t]
            rhs = rhs - cp.rel_entr(tv, tv + expr(t.gain)) / math.log(2.0)
        cons.append(svars[h.var] <= rhs)
    prob = cp.Problem(cp.Maximize(svars[problem.objective]), cons)
    try:
        prob.solve(solver=cp.CLARABEL, max_iter=settings.max_iterations,
                   tol_feas=min(1e-8, settings.feasibility_tol),
                   tol_gap_abs=min(1e-8, settings.objective_tol * 1e-2),
                   tol_gap_rel=min(1e-8, settings.objective_tol * 1e-2))
    except cp.SolverError:
        return Solution("numerical-limit", float("nan"), {}, info={"backend": "dense"})
    status = _STATUS.get(prob.status, "numerical-limit")
    if status == "infeasible":
        return Solution(status, float("nan"), {}, info={"backend": "dense"})
    scalars = {k: float(v.value) for k, v in svars.items()}
    matrices = {k: np.asarray(v.value, dtype=complex) for k, v in mvars.items()}
    obj = scalars[problem.objective]
    return Solution(status, obj, scalars, matrices, upper_bound=obj,
                    iterations=int(prob.solver_stats.num_iters or 0),
                    info={"backend": "dense", "raw_status": prob.status})
