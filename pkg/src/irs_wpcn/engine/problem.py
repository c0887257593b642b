"""Problem representation for the convex engine.

A :class:`ConeProblem` maximizes one designated scalar subject to

* linear (in)equalities over scalars and trace functionals ``tr(A W)``,
* Hermitian PSD matrix variables whose diagonals are pinned to a scalar,
* hypograph constraints ``z <= sum_k t_k log2(1 + g_k / t_k)`` where each
  ``g_k`` is affine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATUSES = ("optimal", "infeasible", "numerical-limit")


class Affine:
    """Affine expression ``sum c_i x_i + sum w_j tr(A_j W_j) + const``."""

    __slots__ = ("scalars", "traces", "const")

    def __init__(self, scalars=None, traces=None, const=0.0):
        self.scalars = dict(scalars or {})
        self.traces = list(traces or [])
        self.const = float(const)

    def __add__(self, other):
        other = _as_affine(other)
        s = dict(self.scalars)
        for k, v in other.scalars.items():
            s[k] = s.get(k, 0.0) + v
        return Affine(s, self.traces + other.traces, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-_as_affine(other))

    def __rsub__(self, other):
        return _as_affine(other) - self

    def __mul__(self, c):
        c = float(c)
        return Affine({k: c * v for k, v in self.scalars.items()},
                      [(m, a, c * w) for m, a, w in self.traces], c * self.const)

    __rmul__ = __mul__

    def evaluate(self, scalars: dict, matrices: dict | None = None) -> float:
        val = self.const + sum(c * scalars[k] for k, c in self.scalars.items())
        for m, a, w in self.traces:
            val += w * float(np.real(np.sum(a * matrices[m].T)))
        return float(val)

    def __repr__(self):
        terms = [f"{v:+g}*{k}" for k, v in self.scalars.items()]
        terms += [f"{w:+g}*tr(A,{m})" for m, _, w in self.traces]
        return "Affine(" + " ".join(terms) + f" {self.const:+g})"


def _as_affine(x) -> Affine:
    return x if isinstance(x, Affine) else Affine(const=float(x))


def var(name: str) -> Affine:
    return Affine({name: 1.0})


def trace(matrix: str, coeff: np.ndarray, weight: float = 1.0) -> Affine:
    return Affine(traces=[(matrix, np.asarray(coeff, dtype=complex), float(weight))])


@dataclass(frozen=True)
class Linear:
    """``expr <= 0`` or ``expr == 0``."""

    expr: Affine
    sense: str = "<="
    name: str = ""

    def __post_init__(self):
        if self.sense not in ("<=", "=="):
            raise ValueError(f"bad sense {self.sense!r}")


@dataclass(frozen=True)
class DiagPin:
    matrix: str
    scalar: str


@dataclass(frozen=True)
class PerspectiveLogTerm:
    """t * log2(1 + gain / t); jointly concave in (t, gain) for t >= 0."""

    t: str
    gain: Affine

    def value(self, scalars: dict, matrices: dict | None = None) -> float:
        t = scalars[self.t]
        if t <= 0:
            return 0.0
        g = max(self.gain.evaluate(scalars, matrices), 0.0)
        if g / t < 1e300:
            return float(t * np.log1p(g / t) / np.log(2.0))
        return float(t * (np.log2(t + g) - np.log2(t)))  # g/t overflows


@dataclass(frozen=True)
class Hypograph:
    """``var <= sum(terms)``."""

    var: str
    terms: tuple
    name: str = ""

    def rhs(self, scalars, matrices=None) -> float:
        return sum(term.value(scalars, matrices) for term in self.terms)


@dataclass
class ConeProblem:
    scalars: dict = field(default_factory=dict)  # name -> nonneg flag
    matrices: dict = field(default_factory=dict)  # name -> dimension
    linear: list = field(default_factory=list)
    pins: list = field(default_factory=list)
    hypographs: list = field(default_factory=list)
    objective: str | None = None

    def scalar(self, name: str, nonneg: bool = True) -> Affine:
        if name in self.scalars or name in self.matrices:
            raise ValueError(f"duplicate variable {name!r}")
        self.scalars[name] = nonneg
        return var(name)

    def matrix(self, name: str, dim: int) -> str:
        if name in self.scalars or name in self.matrices:
            raise ValueError(f"duplicate variable {name!r}")
        if dim < 1:
            raise ValueError("matrix dimension must be >= 1")
        self.matrices[name] = int(dim)
        return name

    def le(self, lhs, rhs=0.0, name: str = ""):
        self.linear.append(Linear(_as_affine(lhs) - rhs, "<=", name))

    def eq(self, lhs, rhs=0.0, name: str = ""):
        self.linear.append(Linear(_as_affine(lhs) - rhs, "==", name))

    def pin_diagonal(self, matrix: str, scalar: str):
        self.pins.append(DiagPin(matrix, scalar))

    def hypograph(self, var_name: str, terms, name: str = ""):
        self.hypographs.append(Hypograph(var_name, tuple(terms), name))

    def maximize(self, name: str):
        self.objective = name

    def counts(self) -> dict:
        return {
            "scalars": len(self.scalars),
            "matrices": len(self.matrices),
            "psd": len(self.matrices),
            "linear_le": sum(c.sense == "<=" for c in self.linear),
            "linear_eq": sum(c.sense == "==" for c in self.linear),
            "pins": len(self.pins),
            "hypographs": len(self.hypographs),
            "perspective_terms": sum(len(h.terms) for h in self.hypographs),
        }

    def check(self):
        """Raise ``ValueError`` on undeclared references or shape mismatches."""
        if self.objective not in self.scalars:
            raise ValueError("objective must be a declared scalar")

        def check_affine(e: Affine):
            for k in e.scalars:
                if k not in self.scalars:
                    raise ValueError(f"undeclared scalar {k!r}")
            for m, a, _ in e.traces:
                if m not in self.matrices:
                    raise ValueError(f"undeclared matrix {m!r}")
                n = self.matrices[m]
                if a.shape != (n, n):
                    raise ValueError(f"coefficient for {m!r} has shape {a.shape}, expected {(n, n)}")
                if not np.allclose(a, a.conj().T, atol=1e-12 * max(1.0, np.abs(a).max())):
                    raise ValueError(f"coefficient for {m!r} is not Hermitian")

        for c in self.linear:
            check_affine(c.expr)
        for h in self.hypographs:
            if h.var not in self.scalars:
                raise ValueError(f"undeclared scalar {h.var!r}")
            for term in h.terms:
                if term.t not in self.scalars or not self.scalars[term.t]:
                    raise ValueError(f"perspective variable {term.t!r} must be a non-negative scalar")
                check_affine(term.gain)
        pinned = set()
        for p in self.pins:
            if p.matrix not in self.matrices or p.scalar not in self.scalars:
                raise ValueError(f"bad diagonal pin {p}")
            if p.matrix in pinned:
                raise ValueError(f"matrix {p.matrix!r} pinned twice")
            pinned.add(p.matrix)


@dataclass(frozen=True)
class SolverSettings:
    feasibility_tol: float = 1e-7
    objective_tol: float = 1e-6
    max_iterations: int = 200
    max_rounds: int = 80
    method: str = "auto"  # auto | cutting-plane | dense
    # Largest certified gap (relative, on the optimum) still reported as
    # optimal when the cutting-plane loop stops adding directions.
    bound_tol: float = 1e-4

    def __post_init__(self):
        if self.feasibility_tol <= 0 or self.objective_tol <= 0 or self.bound_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("auto", "cutting-plane", "dense"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Solution:
    status: str
    objective: float
    scalars: dict
    matrices: dict = field(default_factory=dict)
    upper_bound: float = float("nan")
    iterations: int = 0
    duals: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"
