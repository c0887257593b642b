"""Outer/inner approximation of PSD blocks with pinned diagonals.

A matrix variable ``W`` with ``diag(W) = s`` that enters the problem only
through ``y_k = tr(A_k W)`` can be replaced by ``y in s*K`` where ``K`` is the
elliptope image of the ``A_k``. When every ``A_k`` is PSD and larger ``y``
never hurts (``y`` appears with the helpful sign everywhere), ``K`` may be
replaced by its dominated hull, and:

* cuts ``c.y <= s h(c)`` give an outer problem whose value bounds the
  optimum from above;
* columns ``y <= sum_j mu_j x_j, sum_j mu_j = s`` built from achieved
  points give an inner problem whose solution is a feasible ``W``.

Directions come from inner-problem prices and, for two-form blocks, from
bisecting the outer polygon around the outer optimum.
"""

from __future__ import annotations

import math

import numpy as np

from .conic import solve_scalar
from .elliptope import support
from .problem import (Affine, ConeProblem, Hypograph, Linear, PerspectiveLogTerm, Solution,
                      SolverSettings)


class NotReducible(Exception):
    pass


class _Block:
    def __init__(self, name: str, dim: int, pin: str):
        self.name = name
        self.dim = dim
        self.pin = pin
        self.mats: list[np.ndarray] = []
        self.scales: list[float] = []
        self.points = []  # SupportPoint list

    def form_index(self, a: np.ndarray) -> int | None:
        """Index of ``a`` among this block's normalized forms (None if a == 0)."""
        tr = float(np.real(np.trace(a)))
        if tr <= 0:
            if np.abs(a).max() == 0:
                return None
            raise NotReducible("trace coefficient is not PSD")
        for i, (m, s) in enumerate(zip(self.mats, self.scales)):
            if abs(s - tr) <= 1e-14 * tr and np.allclose(m * s, a, rtol=0, atol=1e-14 * tr):
                return i
        w = np.linalg.eigvalsh(a)
        if w[0] < -1e-10 * max(w[-1], 1e-300):
            raise NotReducible("trace coefficient is not PSD")
        self.mats.append(a / tr)
        self.scales.append(tr)
        return len(self.mats) - 1

    def yname(self, k: int) -> str:
        return f"__y[{self.name}][{k}]"

    def add_direction(self, c) -> bool:
        c = np.maximum(np.asarray(c, dtype=float), 0.0)
        nrm = np.linalg.norm(c)
        if nrm <= 0:
            return False
        c = c / nrm
        for p in self.points:
            if np.linalg.norm(p.direction - c) < 1e-9:
                return False
        self.points.append(support(self.mats, c))
        return True


def _reduce(problem: ConeProblem):
    pins = {p.matrix: p.scalar for p in problem.pins}
    blocks = {}
    for m, n in problem.matrices.items():
        if m not in pins:
            raise NotReducible(f"matrix {m!r} has no pinned diagonal")
        blocks[m] = _Block(m, n, pins[m])

    def rewrite(expr: Affine, helpful_sign: float) -> Affine:
        out = Affine(expr.scalars, None, expr.const)
        for m, a, w in expr.traces:
            k = blocks[m].form_index(a)
            if k is None or w == 0:
                continue
            if w * helpful_sign < 0:
                raise NotReducible("trace term enters with a harmful sign")
            y = blocks[m].yname(k)
            out.scalars[y] = out.scalars.get(y, 0.0) + w * blocks[m].scales[k]
        return out

    base = ConeProblem(objective=problem.objective)
    base.scalars = dict(problem.scalars)
    for con in problem.linear:
        if con.expr.traces and con.sense == "==":
            raise NotReducible("trace term inside an equality")
        base.linear.append(Linear(rewrite(con.expr, -1.0), con.sense, con.name))
    for h in problem.hypographs:
        terms = tuple(PerspectiveLogTerm(t.t, rewrite(t.gain, +1.0)) for t in h.terms)
        base.hypographs.append(Hypograph(h.var, terms, h.name))
    for b in blocks.values():
        for k in range(len(b.mats)):
            base.scalars[b.yname(k)] = True
    return base, blocks


def _initial_directions(b: _Block):
    m = len(b.mats)
    if m == 0:
        return
    if m == 1:
        b.add_direction([1.0])
    elif m == 2:
        for th in np.linspace(0.0, math.pi / 2, 5):
            b.add_direction([math.cos(th), math.sin(th)])
    else:
        for k in range(m):
            b.add_direction(np.eye(m)[k])
        b.add_direction(np.ones(m))


def _outer(base: ConeProblem, blocks) -> ConeProblem:
    p = ConeProblem(dict(base.scalars), {}, list(base.linear), [], base.hypographs, base.objective)
    for b in blocks.values():
        for pt in b.points:
            e = Affine({b.yname(k): float(pt.direction[k]) for k in range(len(b.mats))})
            e = e + Affine({b.pin: -pt.upper})
            p.linear.append(Linear(e, "<=", f"cut[{b.name}]"))
    return p


def _inner(base: ConeProblem, blocks):
    p = ConeProblem(dict(base.scalars), {}, list(base.linear), [], base.hypographs, base.objective)
    price_rows = {}
    for b in blocks.values():
        if not b.mats:
            continue
        mus = []
        for j, _ in enumerate(b.points):
            mu = f"__mu[{b.name}][{j}]"
            p.scalars[mu] = True
            mus.append(mu)
        p.linear.append(Linear(Affine({mu: 1.0 for mu in mus}) - Affine({b.pin: 1.0}), "=="))
        for k in range(len(b.mats)):
            e = Affine({b.yname(k): 1.0})
            for mu, pt in zip(mus, b.points):
                e = e - Affine({mu: float(pt.point[k])})
            price_rows[(b.name, k)] = len(p.linear)
            p.linear.append(Linear(e, "<="))
    return p, price_rows


def _bisect_direction(b: _Block, ys: np.ndarray, s: float):
    """New angle between the two cuts that are tightest at the outer point."""
    if len(b.mats) != 2 or s <= 1e-12:
        return None
    pts = sorted(b.points, key=lambda pt: math.atan2(pt.direction[1], pt.direction[0]))
    angs = [math.atan2(pt.direction[1], pt.direction[0]) for pt in pts]
    slack = [(pt.upper * s - float(pt.direction @ ys)) / max(pt.upper * s, 1e-300) for pt in pts]
    best, best_i = np.inf, None
    for i in range(len(angs) - 1):
        if angs[i + 1] - angs[i] < 1e-7:
            continue
        v = slack[i] + slack[i + 1]
        if v < best:
            best, best_i = v, i
    if best_i is None:
        return None
    return 0.5 * (angs[best_i] + angs[best_i + 1])


def solve_cutting_plane(problem: ConeProblem, settings: SolverSettings = SolverSettings()) -> Solution:
    base, blocks = _reduce(problem)
    for b in blocks.values():
        _initial_directions(b)
    lb_sol = ub_sol = None
    rounds = 0
    status = "numerical-limit"
    for rounds in range(1, settings.max_rounds + 1):
        ub_sol = solve_scalar(_outer(base, blocks), settings)
        if ub_sol.status == "infeasible":
            status = "infeasible"
            break
        inner, price_rows = _inner(base, blocks)
        lb_sol = solve_scalar(inner, settings)
        if not (ub_sol.ok and lb_sol.ok):
            break
        ub, lb = ub_sol.objective, lb_sol.objective
        if ub - lb <= settings.objective_tol * max(1.0, abs(ub)) * 0.1:
            status = "optimal"
            break
        added = False
        for b in blocks.values():
            m = len(b.mats)
            if m == 0:
                continue
            price = np.array([lb_sol.duals.get(price_rows[(b.name, k)], 0.0) for k in range(m)])
            if b.add_direction(price):
                added = True
            ys = np.array([ub_sol.scalars[b.yname(k)] for k in range(m)])
            th = _bisect_direction(b, ys, ub_sol.scalars[b.pin])
            if th is not None and b.add_direction([math.cos(th), math.sin(th)]):
                added = True
        if not added:
            if ub - lb <= settings.bound_tol * max(1.0, abs(ub)):
                status = "optimal"
            break
    if lb_sol is None or lb_sol.status == "infeasible":
        return Solution("infeasible", float("nan"), {}, iterations=rounds)

    scalars = {k: lb_sol.scalars[k] for k in problem.scalars}
    matrices = {}
    for b in blocks.values():
        s = scalars[b.pin]
        if not b.mats:
            # Never referenced: any unit-diagonal PSD matrix will do.
            matrices[b.name] = s * np.eye(b.dim, dtype=complex)
            continue
        W = np.zeros((b.dim, b.dim), dtype=complex)
        for j, pt in enumerate(b.points):
            mu = max(lb_sol.scalars.get(f"__mu[{b.name}][{j}]", 0.0), 0.0)
            if mu > 0:
                W += mu * (pt.factor @ pt.factor.conj().T)
        tot = float(np.real(np.trace(W))) / b.dim
        if s > 0 and tot > 0:
            W *= s / tot  # absorb solver round-off so diag(W) = s
        elif s <= 0:
            W[:] = 0.0
        matrices[b.name] = 0.5 * (W + W.conj().T)
    ub = ub_sol.objective if ub_sol is not None and ub_sol.ok else float("nan")
    return Solution(status, lb_sol.objective, scalars, matrices, upper_bound=max(ub, lb_sol.objective),
                    iterations=rounds,
                    info={"backend": "cutting-plane",
                          "cuts": {b.name: len(b.points) for b in blocks.values()}})
