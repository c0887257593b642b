"""Support function of the complex elliptope image {(tr(A_k V))_k : V >= 0, diag V = 1}.

For ``C = sum_k c_k A_k`` the support value ``max tr(C V)`` is found on a
low-rank factor ``V = Y Y^H`` (unit-norm rows) by generalized power
iterations ``Y <- rownormalize(C Y)``, which ascend for PSD ``C``. The
returned value is a certified upper bound from the dual
``min sum(y) s.t. diag(y) >= C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SupportPoint:
    direction: np.ndarray
    upper: float  # certified bound on max c.x over the set
    point: np.ndarray  # achieved x = (tr(A_k V))_k
    factor: np.ndarray  # Y with V = Y Y^H

    @property
    def gap(self) -> float:
        return self.upper - float(self.direction @ self.point)


def _forms(mats, Y) -> np.ndarray:
    return np.array([np.real(np.vdot(Y, A @ Y)) for A in mats])


def support(mats, direction, rel_tol: float = 1e-11, max_iter: int = 5000,
            seed: int = 0) -> SupportPoint:
    """Maximize ``direction . (tr(A_k V))_k`` over the unit-diagonal PSD cone.

    ``mats`` must be Hermitian PSD and ``direction`` non-negative, so that the
    combined cost matrix is PSD.
    """
    c = np.asarray(direction, dtype=float)
    if np.any(c < 0):
        raise ValueError("direction must be non-negative")
    n = mats[0].shape[0]
    C = sum(ck * A for ck, A in zip(c, mats))
    C = 0.5 * (C + C.conj().T)
    if n == 1:
        Y = np.ones((1, 1), dtype=complex)
        return SupportPoint(c, float(np.real(C[0, 0])), _forms(mats, Y), Y)
    k = min(n, int(math.ceil(math.sqrt(2 * n))) + 1)
    rng = np.random.default_rng(seed)
    w, U = np.linalg.eigh(C)
    Y = 0.05 * (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
    Y[:, 0] += np.exp(1j * np.angle(U[:, -1]))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    scale = max(float(w[-1]), 1e-300)
    best_ub = np.inf
    for it in range(max_iter):
        Z = C @ Y
        if it % 10 == 0:
            d = np.real(np.sum(Z * Y.conj(), axis=1))
            f = float(d.sum())
            lam = np.linalg.eigvalsh(np.diag(d) - C)[0]
            ub = f + n * max(0.0, -float(lam))
            best_ub = min(best_ub, ub)
            if best_ub - f <= rel_tol * max(abs(best_ub), scale * 1e-12):
                break
        norms = np.linalg.norm(Z, axis=1, keepdims=True)
        Y = np.where(norms > 0, Z / np.where(norms > 0, norms, 1.0), Y)
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    x = _forms(mats, Y)
    best_ub = max(best_ub, float(c @ x))
    return SupportPoint(c, best_ub, x, Y)
