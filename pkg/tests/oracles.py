"""Independent reference computations used by the tests.

Nothing here goes through the convex engine except ``phase_grid_optimum``,
whose inner allocation solve is passed in by the caller.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def direct_gains(r, v1, v2, v3, v4) -> dict:
    """Effective power gains written straight from the channel arrays."""

    def h(v, refl, direct):
        return float(abs(np.sum(np.asarray(v) * refl) + direct) ** 2)

    c1 = r.g * r.alpha_1r
    c2 = r.g * r.alpha_2r
    c12 = r.alpha_1r * r.alpha_2r
    return {
        "e1": h(v1, c1, r.alpha_1), "e2": h(v1, c2, r.alpha_2),
        "a1": h(v2, c12, r.alpha_12), "b1": h(v2, c1, r.alpha_1),
        "c2": h(v3, c12, r.alpha_12), "b2": h(v3, c2, r.alpha_2),
        "h1": h(v4, c1, r.alpha_1), "h2": h(v4, c2, r.alpha_2),
    }


def _plog(t, x):
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, t * np.log2(1.0 + np.maximum(x, 0.0) / safe), 0.0)


def simplex_grid(parts: int, m: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``m``."""
    out = [c for c in itertools.combinations(range(m + parts - 1), parts - 1)]
    bars = np.array(out)
    edges = np.hstack([-np.ones((len(bars), 1), int), bars, np.full((len(bars), 1), m + parts - 1)])
    return np.diff(edges, axis=1) - 1


def _golden_max(f, lo, hi, iters):
    """Vectorised golden-section maximisation of concave ``f`` on [lo, hi]."""
    a, b = lo.copy(), hi.copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - GOLDEN * (b - a)
        new_d = a + GOLDEN * (b - a)
        c2 = np.where(left, new_c, d)
        d2 = np.where(left, c, new_d)
        fc_new = np.where(left, f(c2), fd)
        fd_new = np.where(left, fc, f(d2))
        c, d, fc, fd = c2, d2, fc_new, fd_new
    best = np.maximum.reduce([fc, fd, f(lo), f(hi)])
    return best


def coop_grid_optimum(gains: dict, rho: float, eta_p1: float, step: float = 0.02,
                      iters: int = 28) -> float:
    """Max-min rate of the three-phase protocol over a time grid.

    Durations (t1, t21, t22, t3) run over the ``step`` simplex (unused time
    only lowers harvested energy, so the budget is spent in full). For each
    grid point the Alamouti split t3 = t31 + t32 is optimised in closed form
    and the exchange energies (x1, x2) by nested golden-section search; the
    phase-III powers are constant, P3i = (E_i - x_i) / t3.
    """
    m = int(round(1.0 / step))
    grid = simplex_grid(4, m) * step
    t1, t21, t22, t3 = grid.T
    e1 = eta_p1 * t1 * gains["e1"]
    e2 = eta_p1 * t1 * gains["e2"]

    def value(x1, x2):
        a1 = _plog(t21, rho * x1 * gains["a1"])
        b1 = _plog(t21, rho * x1 * gains["b1"])
        a2 = _plog(t22, rho * x2 * gains["c2"])
        b2 = _plog(t22, rho * x2 * gains["b2"])
        q = _plog(t3, rho * ((e1 - x1) * gains["h1"] + (e2 - x2) * gains["h2"]))
        return np.minimum.reduce([a1, a2, b1 + q, b2 + q, 0.5 * (b1 + b2 + q)])

    zero = np.zeros_like(e1)

    def outer(x1):
        return _golden_max(lambda x2: value(x1, x2), zero, e2, iters)

    return float(_golden_max(outer, zero, e1, iters).max())


def indep_grid_optimum(gains: dict, rho: float, eta_p1: float, step: float = 0.02) -> float:
    """Max-min rate of harvest-then-transmit over a (t0, t1, t2) grid.

    ``gains`` holds e1, e2 (energy slot) and h1, h2 (upload slots). All
    harvested energy is spent, which is optimal.
    """
    m = int(round(1.0 / step))
    t0, t1, t2 = (simplex_grid(3, m) * step).T
    r1 = _plog(t1, rho * eta_p1 * t0 * gains["e1"] * gains["h1"])
    r2 = _plog(t2, rho * eta_p1 * t0 * gains["e2"] * gains["h2"])
    return float(np.minimum(r1, r2).max())


def pareto_front(points: np.ndarray) -> np.ndarray:
    """Nondominated subset (maximising both coordinates), sorted by x ascending."""
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    keep, best_y = [], -np.inf
    for i in order:
        if points[i, 1] > best_y:
            keep.append(i)
            best_y = points[i, 1]
    return points[keep][::-1]


def phase_candidates(n: int, k: int) -> np.ndarray:
    """All ``k**n`` grid phase vectors, shape (k**n, n)."""
    base = np.exp(2j * np.pi * np.arange(k) / k)
    return np.array(list(itertools.product(base, repeat=n))).reshape(-1, n)


def phase_grid_optimum(r, allocation_value, k: int = 32):
    """Exhaustive max-min over a ``k``-point-per-element phase grid.

    ``allocation_value(gains)`` must return the optimal max-min rate for
    fixed gains. The optimum is nondecreasing in every gain, so each phase
    vector's (gain, gain) pairs are Pareto-pruned and the product of fronts
    is searched best-first with the bound F(elementwise max over a box).
    Returns ``(value, gains, evaluations)``.
    """
    vs = phase_candidates(r.n_elements, k)
    c1, c2 = r.g * r.alpha_1r, r.g * r.alpha_2r
    c12 = r.alpha_1r * r.alpha_2r

    def h(refl, direct):
        return np.abs(vs @ refl + direct) ** 2

    names = [("e1", "e2"), ("a1", "b1"), ("c2", "b2"), ("h1", "h2")]
    fronts = [
        pareto_front(np.column_stack([h(c1, r.alpha_1), h(c2, r.alpha_2)])),
        pareto_front(np.column_stack([h(c12, r.alpha_12), h(c1, r.alpha_1)])),
        pareto_front(np.column_stack([h(c12, r.alpha_12), h(c2, r.alpha_2)])),
        pareto_front(np.column_stack([h(c1, r.alpha_1), h(c2, r.alpha_2)])),
    ]
    evals = 0

    def bound(box):
        nonlocal evals
        g = {}
        for (lo, hi), front, (nx, ny) in zip(box, fronts, names):
            g[nx] = front[hi - 1, 0]
            g[ny] = front[lo, 1]
        evals += 1
        return allocation_value(g), g

    root = tuple((0, len(f)) for f in fronts)
    ub, g = bound(root)
    heap = [(-ub, 0, root, g)]
    counter = itertools.count(1)
    best, best_g = -np.inf, None
    while heap:
        neg, _, box, g = heapq.heappop(heap)
        if -neg <= best:
            break
        widths = [hi - lo for lo, hi in box]
        if max(widths) == 1:
            best, best_g = -neg, g
            continue
        j = int(np.argmax(widths))
        lo, hi = box[j]
        mid = (lo + hi) // 2
        for part in ((lo, mid), (mid, hi)):
            child = box[:j] + (part,) + box[j + 1:]
            cub, cg = bound(child)
            if cub > best:
                heapq.heappush(heap, (-cub, next(counter), child, cg))
    return best, best_g, evals
