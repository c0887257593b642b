"""Scalar exponential-cone programs solved directly with Clarabel.

Each perspective term ``t log2(1 + g/t)`` gets an auxiliary ``u`` (in nats)
with ``(u, t, t + g)`` in the exponential cone, i.e. ``t exp(u/t) <= t + g``.
"""

from __future__ import annotations

import math

import clarabel
import numpy as np
import scipy.sparse as sp

from .problem import ConeProblem, Solution, SolverSettings

_STATUS = {
    "Solved": "optimal",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
}


# Retried in order when the interior-point run stops short (AlmostSolved,
# InsufficientProgress, ...): the defaults, then without equilibration, then
# with a stronger static regularisation.
_ATTEMPTS = (
    {},
    {"equilibrate_enable": False},
    {"static_regularization_constant": 1e-7, "max_iter": 400},
)


class _Rows:
    def __init__(self):
        self.rows, self.cols, self.vals, self.b = [], [], [], []

    def add(self, coefs: dict, rhs: float):
        r = len(self.b)
        for j, v in coefs.items():
            if v != 0.0:
                self.rows.append(r)
                self.cols.append(j)
                self.vals.append(v)
        self.b.append(rhs)
        return r


def solve_scalar(problem: ConeProblem, settings: SolverSettings = SolverSettings()) -> Solution:
    """Solve a problem without matrix variables.

    ``Solution.duals`` maps the index of each ``Linear`` constraint to its
    multiplier (non-negative for ``<=`` rows).
    """
    if problem.matrices:
        raise ValueError("solve_scalar does not accept matrix variables")
    names = list(problem.scalars)
    index = {k: i for i, k in enumerate(names)}
    terms = [t for h in problem.hypographs for t in h.terms]
    nvar = len(names) + len(terms)
    u_index = {id(t): len(names) + j for j, t in enumerate(terms)}

    def coefs(expr, sign=1.0):
        return {index[k]: sign * v for k, v in expr.scalars.items()}

    eq, ineq = _Rows(), _Rows()
    eq_map, ineq_map = {}, {}
    for ci, con in enumerate(problem.linear):
        if con.expr.traces:
            raise ValueError("trace terms need matrix variables")
        target, rmap = (eq, eq_map) if con.sense == "==" else (ineq, ineq_map)
        rmap[ci] = target.add(coefs(con.expr), -con.expr.const)
    for k, nonneg in problem.scalars.items():
        if nonneg:
            ineq.add({index[k]: -1.0}, 0.0)
    for h in problem.hypographs:
        row = {index[h.var]: math.log(2.0)}
        for t in h.terms:
            row[u_index[id(t)]] = row.get(u_index[id(t)], 0.0) - 1.0
        ineq.add(row, 0.0)
    expc = _Rows()
    for t in terms:
        expc.add({u_index[id(t)]: -1.0}, 0.0)
        expc.add({index[t.t]: -1.0}, 0.0)
        row = {index[t.t]: -1.0}
        for k, v in t.gain.scalars.items():
            row[index[k]] = row.get(index[k], 0.0) - v
        expc.add(row, t.gain.const)

    blocks, cones = [], []
    offset = 0
    eq_off = offset
    if eq.b:
        blocks.append(eq)
        cones.append(clarabel.ZeroConeT(len(eq.b)))
        offset += len(eq.b)
    ineq_off = offset
    if ineq.b:
        blocks.append(ineq)
        cones.append(clarabel.NonnegativeConeT(len(ineq.b)))
        offset += len(ineq.b)
    if expc.b:
        blocks.append(expc)
        cones.extend(clarabel.ExponentialConeT() for _ in terms)
        offset += len(expc.b)

    rows, cols, vals, b = [], [], [], []
    base = 0
    for blk in blocks:
        rows.extend(r + base for r in blk.rows)
        cols.extend(blk.cols)
        vals.extend(blk.vals)
        b.extend(blk.b)
        base += len(blk.b)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(base, nvar))
    P = sp.csc_matrix((nvar, nvar))
    q = np.zeros(nvar)
    q[index[problem.objective]] = -1.0

    b = np.asarray(b, dtype=float)
    sol = None
    for attempt in _ATTEMPTS:
        opts = clarabel.DefaultSettings()
        opts.verbose = False
        opts.max_iter = settings.max_iterations
        opts.tol_feas = min(1e-8, settings.feasibility_tol)
        opts.tol_gap_abs = min(1e-8, settings.objective_tol * 1e-2)
        opts.tol_gap_rel = min(1e-8, settings.objective_tol * 1e-2)
        for key, val in attempt.items():
            setattr(opts, key, val)
        sol = clarabel.DefaultSolver(P, q, A, b, cones, opts).solve()
        if str(sol.status) in _STATUS:
            break
    status = _STATUS.get(str(sol.status), "numerical-limit")
    x = np.asarray(sol.x)
    z = np.asarray(sol.z)
    scalars = {k: float(x[i]) for k, i in index.items()}
    for k, nonneg in problem.scalars.items():
        if nonneg and scalars[k] < 0.0:
            scalars[k] = 0.0
    duals = {ci: float(z[eq_off + r]) for ci, r in eq_map.items()}
    duals.update({ci: float(z[ineq_off + r]) for ci, r in ineq_map.items()})
    obj = scalars[problem.objective] if status != "infeasible" else float("nan")
    return Solution(status, obj, scalars, upper_bound=obj, iterations=int(sol.iterations),
                    duals=duals, info={"backend": "clarabel", "raw_status": str(sol.status)})
