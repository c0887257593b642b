"""Aggregates over result rows: means, standard errors, gains, frontier audits."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

REFERENCE = "CoopWithIrs"


def describe(values) -> dict:
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n == 0:
        return {"n": 0, "mean": None, "std": None, "stderr": None}
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return {"n": n, "mean": float(np.mean(x)), "std": std, "stderr": std / np.sqrt(n)}


def point_stats(table, field: str = "min_rate") -> dict:
    """``{scheme: {value: describe(...)}}`` over successful rows."""
    out = {}
    for s in table.schemes():
        out[s] = {v: describe([getattr(r, field) for r in table.select(s, v)])
                  for v in table.values()}
    return out


def scheme_stats(table, field: str = "min_rate") -> dict:
    return {s: describe([getattr(r, field) for r in table.select(s)]) for s in table.schemes()}


def means(table, field: str = "min_rate") -> dict:
    """``{scheme: array of per-point means}`` aligned with ``table.values()``."""
    ps = point_stats(table, field)
    return {s: np.array([ps[s][v]["mean"] if ps[s][v]["n"] else np.nan for v in table.values()])
            for s in ps}


def gains(table, reference: str = REFERENCE, field: str = "min_rate") -> dict:
    """Relative gain of ``reference`` over every other scheme, two ways.

    ``per_point`` averages the per-point gains ``m_ref(x)/m_s(x) - 1``;
    ``pooled`` is the gain of the means pooled over all points.
    """
    m = means(table, field)
    if reference not in m:
        return {}
    out = {}
    for s, ms in m.items():
        if s == reference:
            continue
        ref = m[reference]
        with np.errstate(divide="ignore", invalid="ignore"):
            per = ref / ms - 1.0
        out[s] = {"per_point": float(np.mean(per)), "pooled": float(np.mean(ref) / np.mean(ms) - 1.0),
                  "by_point": [float(g) for g in per]}
    return out


def frontier(table) -> dict:
    """``{scheme: array (k, 3)}`` of (omega, mean R1, mean R2) sorted by omega."""
    out = {}
    r1, r2 = means(table, "r1"), means(table, "r2")
    w = np.array(table.values())
    for s in table.schemes():
        out[s] = np.column_stack([w, r1[s], r2[s]])
    return out


def domination_margin(points, q) -> float:
    """Largest ``t`` with ``sum mu_j p_j >= q + t`` for some convex weights ``mu``.

    ``t >= 0`` means ``q`` is weakly dominated by the convex hull of ``points``.
    """
    p = np.asarray(points, dtype=float)
    k = len(p)
    # variables: mu (k), t; maximize t
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-p.T, np.ones((2, 1))])
    b_ub = -np.asarray(q, dtype=float)
    a_eq = np.append(np.ones(k), 0.0)[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(None, None)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"dominance LP failed: {res.message}")
    return float(res.x[-1])


def dominance(proposed, other, rel_tol: float = 0.0) -> dict:
    """Check every ``other`` point against the hull of ``proposed`` points."""
    scale = max(np.max(np.abs(proposed)), np.max(np.abs(other)), 1e-300)
    margins = [domination_margin(proposed, q) for q in other]
    worst = int(np.argmin(margins))
    return {"ok": bool(min(margins) >= -rel_tol * scale), "worst_margin": margins[worst],
            "worst_index": worst, "margins": margins}


def hull_audit(front, rel_tol: float = 1e-3) -> dict:
    """Audit a weighted-sum frontier ``(omega, R1, R2)``.

    Each point must (a) maximize its own weighted sum over all emitted points
    and (b) not be strictly dominated by a convex combination of the others,
    both up to ``rel_tol`` of the largest rate.
    """
    front = np.asarray(front, dtype=float)
    pts = front[:, 1:]
    scale = max(float(np.max(np.abs(pts))), 1e-300)
    violations = []
    for i, (w, x, y) in enumerate(front):
        ws = w * pts[:, 0] + (1 - w) * pts[:, 1]
        shortfall = float(ws.max() - (w * x + (1 - w) * y))
        if shortfall > rel_tol * scale:
            violations.append({"index": i, "omega": float(w), "kind": "support",
                               "amount": shortfall})
        others = np.delete(pts, i, axis=0)
        if len(others):
            t = domination_margin(others, pts[i])
            if t > rel_tol * scale:
                violations.append({"index": i, "omega": float(w), "kind": "dominated",
                                   "amount": t})
    return {"ok": not violations, "violations": violations}
