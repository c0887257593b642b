"""Semidefinite relaxation of the cooperative max-min (or weighted-sum) problem,
Gaussian-randomization phase recovery and fixed-phase allocation refit.

Scaling: energies are expressed in units of ``E_u = eta * P1 * s`` where
``s = max(tr psi_1, tr psi_2)``, which keeps every coefficient of the conic
program within a few orders of magnitude of one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .channel import ChannelRealization, LiftedChannels, composite_gamma, lift, make_rng
from .engine import Affine, ConeProblem, PerspectiveLogTerm, SolverSettings, trace, var
from .rates import (Allocation, PhaseConfig, RateReport, SystemParams, check_feasibility,
                    evaluate, lifted_matrix, plog2)

DEFAULT_TRIALS = 500

# matrix -> pinned scalar
PINS = {
    "W1": "t1", "W2": "tau21", "W3": "tau22",
    "W41": "tau31", "W41p": "tau31p", "W42": "tau32", "W42p": "tau32p",
}
TAU_KEYS = ("21", "22", "31", "31p", "32", "32p")
T_KEYS = ("1", "21", "22", "31", "32")


class Objective:
    """Max-min (``omega is None``) or weighted sum ``omega R1 + (1-omega) R2``."""

    def __init__(self, omega: float | None = None):
        if omega is not None and not 0.0 <= omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        self.omega = omega

    def __call__(self, r1, r2):
        if self.omega is None:
            return np.minimum(r1, r2)
        return self.omega * r1 + (1.0 - self.omega) * r2

    def __repr__(self):
        return "Objective(max-min)" if self.omega is None else f"Objective(omega={self.omega})"


MAXMIN = Objective()


def _energy_unit(psi_traces, params: SystemParams) -> float:
    s = max(psi_traces)
    return params.eta * params.p_hap * (s if s > 0 else 1.0), (s if s > 0 else 1.0)


def _rate_constraints(p: ConeProblem, form, kappa: float, objective: Objective):
    """Four rate hypographs plus the objective definition."""
    P = PerspectiveLogTerm
    ex1 = P("t21", kappa * form("W2", "21"))
    dir1 = P("t21", kappa * form("W2", "1"))
    jt1 = P("t31", kappa * (form("W41", "1") + form("W42p", "2")))
    ex2 = P("t22", kappa * form("W3", "22"))
    dir2 = P("t22", kappa * form("W3", "2"))
    jt2 = P("t32", kappa * (form("W41p", "1") + form("W42", "2")))
    if objective.omega is None:
        p.scalar("rbar", nonneg=False)
        u1 = u2 = "rbar"
        p.maximize("rbar")
    else:
        p.scalar("r1", nonneg=False)
        p.scalar("r2", nonneg=False)
        p.scalar("wsr", nonneg=False)
        u1, u2 = "r1", "r2"
        p.le(var("wsr") - objective.omega * var("r1") - (1.0 - objective.omega) * var("r2"),
             name="objective")
        p.maximize("wsr")
    p.hypograph(u1, [ex1], "R1_exchange")
    p.hypograph(u1, [dir1, jt1], "R1_direct_joint")
    p.hypograph(u2, [ex2], "R2_exchange")
    p.hypograph(u2, [dir2, jt2], "R2_direct_joint")


def _skeleton(p: ConeProblem, form, e_scale: float, kappa: float, objective: Objective):
    t = {k: p.scalar("t" + k) for k in T_KEYS}
    tau = {k: p.scalar("tau" + k) for k in TAU_KEYS}
    p.le(sum(t.values(), Affine()) - 1.0, name="time")
    p.le(tau["21"] + tau["31"] + tau["31p"] - (1.0 / e_scale) * form("W1", "1"), name="energy1")
    p.le(tau["22"] + tau["32"] + tau["32p"] - (1.0 / e_scale) * form("W1", "2"), name="energy2")
    _rate_constraints(p, form, kappa, objective)


@dataclass
class ProblemScaling:
    energy_unit: float
    psi_scale: float
    kappa: float


def build_p3(lifted: LiftedChannels, params: SystemParams, objective: Objective = MAXMIN):
    """Relaxed program: seven PSD blocks with pinned diagonals.

    Returns ``(problem, scaling)``; energy variables in the problem are in
    units of ``scaling.energy_unit``.
    """
    psi = {"1": lifted.psi_1, "2": lifted.psi_2, "21": lifted.psi_21, "22": lifted.psi_22}
    e_unit, s = _energy_unit([np.real(np.trace(lifted.psi_1)), np.real(np.trace(lifted.psi_2))],
                             params)
    kappa = params.rho * e_unit
    p = ConeProblem()
    n = lifted.dim

    def form(block, key):
        return trace(block, psi[key])

    _skeleton(p, form, s, kappa, objective)
    for m, pin in PINS.items():
        p.matrix(m, n)
        p.pin_diagonal(m, pin)
    p.check()
    return p, ProblemScaling(e_unit, s, kappa)


def phase_gains(r: ChannelRealization, phases: PhaseConfig) -> dict:
    """Effective gains ``|v . gamma + alpha|^2`` of every phase/link pair."""
    g1, g2, g21, g22 = composite_gamma(r)

    def h(v, g, a):
        return float(abs(np.dot(v, g) + a) ** 2)

    v1, v2, v3, v4 = phases.v1, phases.v2, phases.v3, phases.v4
    return {
        "e1": h(v1, g1, r.alpha_1), "e2": h(v1, g2, r.alpha_2),
        "a1": h(v2, g21, r.alpha_12), "b1": h(v2, g1, r.alpha_1),
        "c2": h(v3, g22, r.alpha_12), "b2": h(v3, g2, r.alpha_2),
        "g1_31": h(v4, g1, r.alpha_1), "g2_31": h(v4, g2, r.alpha_2),
        "g1_32": h(v4, g1, r.alpha_1), "g2_32": h(v4, g2, r.alpha_2),
    }


# gain key -> (block, psi key)
GAIN_FORMS = {
    "e1": ("W1", "1"), "e2": ("W1", "2"),
    "a1": ("W2", "21"), "b1": ("W2", "1"),
    "c2": ("W3", "22"), "b2": ("W3", "2"),
    "g1_31": ("W41", "1"), "g2_31": ("W42p", "2"),
    "g1_32": ("W41p", "1"), "g2_32": ("W42", "2"),
}


def build_fixed_phase(gains: dict, params: SystemParams, objective: Objective = MAXMIN):
    """Allocation program for fixed phases: every lifted block collapses to
    its pinned scalar times a constant gain."""
    e_unit, s = _energy_unit([gains["e1"], gains["e2"]], params)
    kappa = params.rho * e_unit
    by_form = {v: k for k, v in GAIN_FORMS.items()}
    p = ConeProblem()

    def form(block, key):
        return gains[by_form[(block, key)]] * var(PINS[block])

    _skeleton(p, form, s, kappa, objective)
    p.check()
    return p, ProblemScaling(e_unit, s, kappa)


@dataclass
class RelaxedSolution:
    status: str
    r_bar_star: float  # certified upper bound on the relaxation optimum
    value: float  # objective at the returned (feasible) relaxed point
    t: dict
    tau: dict
    W: dict
    scaling: ProblemScaling
    objective: Objective = MAXMIN
    iterations: int = 0
    raw: object = None  # engine Solution in scaled variables

    def relaxed_gains(self, lifted: LiftedChannels) -> dict:
        """Per-unit gains tr(psi W)/scale implied by the relaxed matrices."""
        psi = {"1": lifted.psi_1, "2": lifted.psi_2, "21": lifted.psi_21, "22": lifted.psi_22}
        out = {}
        for key, (block, pk) in GAIN_FORMS.items():
            s = self.t["1"] if block == "W1" else self.tau[PINS[block][3:]]
            tr = float(np.real(np.sum(psi[pk] * self.W[block].T)))
            out[key] = tr / s if s > 0 else 0.0
        return out


def solve_relaxation(problem: ConeProblem, scaling: ProblemScaling,
                     settings: SolverSettings = SolverSettings(),
                     objective: Objective = MAXMIN) -> RelaxedSolution:
    sol = engine.solve(problem, settings)
    if sol.status == "infeasible" or not sol.scalars:
        return RelaxedSolution(sol.status, float("nan"), float("nan"), {}, {}, {}, scaling,
                               objective, sol.iterations)
    x = sol.scalars
    t = {k: max(x["t" + k], 0.0) for k in T_KEYS}
    tau = {k: max(x["tau" + k], 0.0) * scaling.energy_unit for k in TAU_KEYS}
    W = {}
    for m, pin in PINS.items():
        mat = sol.matrices[m]
        W[m] = mat if m == "W1" else mat * scaling.energy_unit
    ub = sol.upper_bound if np.isfinite(sol.upper_bound) else sol.objective
    return RelaxedSolution(sol.status, float(ub), float(sol.objective), t, tau, W, scaling,
                           objective, sol.iterations, sol)


def coop_rates_from_gains(t: dict, tau: dict, gains: dict, params: SystemParams):
    """Vectorised (R1, R2) for lifted-style variables and per-unit gains.

    Energy-infeasible devices have all their energy variables scaled down
    to the harvested budget (the cheap power-scaling repair).
    """
    rho = params.rho
    k = params.eta * params.p_hap * t["1"]
    e1 = k * np.asarray(gains["e1"])
    e2 = k * np.asarray(gains["e2"])
    used1 = tau["21"] + tau["31"] + tau["31p"]
    used2 = tau["22"] + tau["32"] + tau["32p"]
    s1 = np.where(used1 > e1, e1 / max(used1, 1e-300), 1.0) if used1 > 0 else np.ones_like(e1)
    s2 = np.where(used2 > e2, e2 / max(used2, 1e-300), 1.0) if used2 > 0 else np.ones_like(e2)
    r1_2 = plog2(t["21"], rho * s1 * tau["21"] * np.asarray(gains["a1"]))
    r0_21 = plog2(t["21"], rho * s1 * tau["21"] * np.asarray(gains["b1"]))
    r2_2 = plog2(t["22"], rho * s2 * tau["22"] * np.asarray(gains["c2"]))
    r0_22 = plog2(t["22"], rho * s2 * tau["22"] * np.asarray(gains["b2"]))
    r1_3 = plog2(t["31"], rho * (s1 * tau["31"] * np.asarray(gains["g1_31"])
                                 + s2 * tau["32p"] * np.asarray(gains["g2_31"])))
    r2_3 = plog2(t["32"], rho * (s1 * tau["31p"] * np.asarray(gains["g1_32"])
                                 + s2 * tau["32"] * np.asarray(gains["g2_32"])))
    r1 = np.minimum(r1_2, r0_21 + r1_3)
    r2 = np.minimum(r2_2, r0_22 + r2_3)
    return r1, r2


def gaussian_candidates(n_plus_1: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """``trials`` draws of r ~ CN(0, I), one per column.

    Drawn trial-major, so the first k columns do not depend on ``trials``.
    """
    z = rng.standard_normal((trials, 2, n_plus_1))
    return ((z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)).T


def extract_phases(vbar: np.ndarray) -> np.ndarray:
    """Unit-modulus v from lifted candidates (columns), undoing the
    conjugate stacking [conj(v); 1]."""
    vbar = np.asarray(vbar)
    ref = vbar[-1:, ...]
    return np.exp(-1j * (np.angle(vbar[:-1, ...]) - np.angle(ref)))


@dataclass
class RandomizationResult:
    v: np.ndarray
    score: float
    scores: np.ndarray


def recover_v(V_star: np.ndarray, objective_eval, trials: int = DEFAULT_TRIALS,
              rng: np.random.Generator | None = None, draws: np.ndarray | None = None
              ) -> RandomizationResult:
    """Gaussian randomization around ``V_star`` followed by phase extraction.

    ``objective_eval`` maps an (N, G) array of unit-modulus candidates to G
    scores; the best candidate (lowest index on ties) is returned.
    """
    V = 0.5 * (V_star + V_star.conj().T)
    n1 = V.shape[0]
    if n1 == 1:
        v = np.zeros((0,), dtype=complex)
        return RandomizationResult(v, float(np.asarray(objective_eval(v[:, None]))[0]),
                                   np.zeros(1))
    w, U = np.linalg.eigh(V)
    # Roundoff-level eigenvalues would add sqrt(eps)-sized noise to every draw.
    w = np.where(w > 1e-12 * max(w[-1], 0.0), w, 0.0)
    if draws is None:
        draws = gaussian_candidates(n1, trials, rng or np.random.default_rng(0))
    cand = (U * np.sqrt(w)) @ draws
    vs = extract_phases(cand)
    scores = np.asarray(objective_eval(vs), dtype=float)
    j = int(np.argmax(scores))
    return RandomizationResult(vs[:, j], float(scores[j]), scores)


def _batch_gain(vs, gamma, alpha):
    return np.abs(gamma @ vs + alpha) ** 2


@dataclass
class RecoveredSolution:
    scheme: str
    status: str
    phases: object
    alloc: object
    rates: object
    r_bar_star: float
    objective_value: float
    objective: Objective = MAXMIN
    relaxed: object = None
    info: dict = field(default_factory=dict)

    @property
    def min_rate(self) -> float:
        return self.rates.min_rate

    @property
    def r1(self) -> float:
        return self.rates.r1

    @property
    def r2(self) -> float:
        return self.rates.r2

    @property
    def gap(self) -> float:
        return self.r_bar_star - self.objective_value


def _repair_constant_power(r, phases, params, t, tau, gains):
    """Map a per-slot-energy solution to the protocol's constant phase-III
    powers without lowering either device's rate."""
    rho = params.rho
    p21 = tau["21"] / t["21"] if t["21"] > 0 else 0.0
    p22 = tau["22"] / t["22"] if t["22"] > 0 else 0.0
    t3 = t["31"] + t["32"]
    p31 = (tau["31"] + tau["31p"]) / t3 if t3 > 0 else 0.0
    p32 = (tau["32"] + tau["32p"]) / t3 if t3 > 0 else 0.0
    r1_3 = plog2(t["31"], rho * (tau["31"] * gains["g1_31"] + tau["32p"] * gains["g2_31"]))
    r2_3 = plog2(t["32"], rho * (tau["31p"] * gains["g1_32"] + tau["32"] * gains["g2_32"]))
    t31, t32 = t["31"], t["32"]
    r1_3, r2_3 = max(r1_3, 0.0), max(r2_3, 0.0)
    if r1_3 + r2_3 > 0:
        t31 = t3 * min(r1_3 / (r1_3 + r2_3), 1.0)
        t32 = max(t3 - t31, 0.0)
    durations = np.array([t["1"], t["21"], t["22"], t31, t32])
    total = durations.sum()
    if total > params.horizon:
        durations *= params.horizon / total
    alloc = Allocation(*durations, p21, p22, p31, p32)
    # Clip to the harvested budget so the audit sees zero (not 1e-9) violation.
    e1 = params.eta * params.p_hap * alloc.t1 * gains["e1"]
    e2 = params.eta * params.p_hap * alloc.t1 * gains["e2"]
    t3 = alloc.t31 + alloc.t32
    u1 = alloc.t21 * alloc.p21 + t3 * alloc.p31
    u2 = alloc.t22 * alloc.p22 + t3 * alloc.p32
    f1 = min(1.0, e1 / u1) if u1 > 0 else 1.0
    f2 = min(1.0, e2 / u2) if u2 > 0 else 1.0
    if f1 < 1.0 or f2 < 1.0:
        alloc = Allocation(alloc.t1, alloc.t21, alloc.t22, alloc.t31, alloc.t32,
                           alloc.p21 * f1, alloc.p22 * f2, alloc.p31 * f1, alloc.p32 * f2)
    return alloc


def refit_allocation(r: ChannelRealization, phases: PhaseConfig, params: SystemParams,
                     settings: SolverSettings = SolverSettings(),
                     objective: Objective = MAXMIN):
    """Optimal time/power allocation for fixed phases.

    Returns ``(allocation, rate_report, relaxed_value)`` where the last item
    is the optimum of the per-slot-energy program; the returned allocation
    is protocol-feasible and reaches that value up to solver accuracy.
    """
    gains = phase_gains(r, phases)
    prob, sc = build_fixed_phase(gains, params, objective)
    sol = engine.solve(prob, settings)
    if not sol.scalars:
        alloc = Allocation()
        return alloc, evaluate(r, phases, params, alloc), 0.0
    x = sol.scalars
    t = {k: max(x["t" + k], 0.0) for k in T_KEYS}
    tau = {k: max(x["tau" + k], 0.0) * sc.energy_unit for k in TAU_KEYS}
    alloc = _repair_constant_power(r, phases, params, t, tau, gains)
    return alloc, evaluate(r, phases, params, alloc), float(sol.objective)


def phase_three_covariances(relaxed: RelaxedSolution) -> list:
    """Unit-diagonal covariances for drawing v4 candidates.

    First W41/tau31 (or, if tau31 = 0, the phase-III block with the largest
    normalizer), then the pooled sum of all four phase-III blocks. The
    relaxation aligns W41 and W42 with different devices, so the first
    alone can miss most of WD2's joint-transmission gain.
    """
    blocks = [("W41", "31"), ("W41p", "31p"), ("W42", "32"), ("W42p", "32p")]
    tau = relaxed.tau
    first = ("W41", "31") if tau["31"] > 0 else max(blocks[1:], key=lambda b: tau[b[1]])
    out = []
    if tau[first[1]] > 0:
        out.append(relaxed.W[first[0]] / tau[first[1]])
    total = sum(tau[k] for _, k in blocks)
    if total > 0:
        out.append(sum(relaxed.W[b] for b, _ in blocks) / total)
    return out


def _recover_coop_phases(r, lifted, relaxed: RelaxedSolution, params, objective, trials, rng):
    n = r.n_elements
    g1, g2, g21, g22 = composite_gamma(r)
    gains = relaxed.relaxed_gains(lifted)
    draws = gaussian_candidates(n + 1, trials, rng) if n else None
    t, tau = relaxed.t, relaxed.tau

    def score(update):
        def f(vs):
            gg = dict(gains)
            gg.update(update(vs))
            r1, r2 = coop_rates_from_gains(t, tau, gg, params)
            return objective(r1, r2)
        return f

    plan = [
        ("v1", "W1", t["1"], lambda vs: {"e1": _batch_gain(vs, g1, r.alpha_1),
                                          "e2": _batch_gain(vs, g2, r.alpha_2)}),
        ("v2", "W2", tau["21"], lambda vs: {"a1": _batch_gain(vs, g21, r.alpha_12),
                                             "b1": _batch_gain(vs, g1, r.alpha_1)}),
        ("v3", "W3", tau["22"], lambda vs: {"c2": _batch_gain(vs, g22, r.alpha_12),
                                             "b2": _batch_gain(vs, g2, r.alpha_2)}),
    ]

    def v4_update(vs):
        h1, h2 = _batch_gain(vs, g1, r.alpha_1), _batch_gain(vs, g2, r.alpha_2)
        return {"g1_31": h1, "g2_31": h2, "g1_32": h1, "g2_32": h2}

    plan.append(("v4", None, None, v4_update))

    out, scores = {}, {}
    for name, block, norm, update in plan:
        if name == "v4":
            covs = phase_three_covariances(relaxed)
        else:
            covs = [relaxed.W[block] / norm] if norm > 0 else []
        if n == 0:
            v = np.zeros(0, dtype=complex)
        elif not covs:
            v = np.ones(n, dtype=complex)
        else:
            best = None
            for cov in covs:
                res = recover_v(cov, score(update), draws=draws)
                if best is None or res.score > best.score:
                    best = res
            v, scores[name] = best.v, best.score
        gains.update({k: float(np.asarray(val).reshape(-1)[0])
                      for k, val in update(v[:, None]).items()})
        out[name] = v
    return PhaseConfig(out["v1"], out["v2"], out["v3"], out["v4"]), scores


def _maximize(r: ChannelRealization, params: SystemParams, settings: SolverSettings,
              objective: Objective, trials: int, seed: int, scheme: str) -> RecoveredSolution:
    t0 = time.perf_counter()
    lifted = lift(r)
    problem, scaling = build_p3(lifted, params, objective)
    relaxed = solve_relaxation(problem, scaling, settings, objective)
    t_relax = time.perf_counter() - t0
    if relaxed.status == "infeasible" or not relaxed.t:
        phases = PhaseConfig.ones(r.n_elements)
        alloc = Allocation()
        rep = evaluate(r, phases, params, alloc)
        return RecoveredSolution(scheme, relaxed.status, phases, alloc, rep, float("nan"), 0.0,
                                 objective, relaxed)
    phases, scores = _recover_coop_phases(r, lifted, relaxed, params, objective, trials,
                                          make_rng(seed, stream=1))
    alloc, rep, _ = refit_allocation(r, phases, params, settings, objective)
    value = float(objective(rep.r1, rep.r2))
    return RecoveredSolution(
        scheme, relaxed.status, phases, alloc, rep, relaxed.r_bar_star, value, objective, relaxed,
        info={"randomization_scores": scores, "relaxation_time": t_relax,
              "total_time": time.perf_counter() - t0, "rounds": relaxed.iterations},
    )


def maximize_common_throughput(r: ChannelRealization, params: SystemParams,
                               settings: SolverSettings = SolverSettings(),
                               trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    """Relax, randomize, refit: feasible max-min solution plus its SDR bound."""
    return _maximize(r, params, settings, MAXMIN, trials, seed, "CoopWithIrs")


def maximize_weighted_sum(r: ChannelRealization, params: SystemParams, omega: float,
                          settings: SolverSettings = SolverSettings(),
                          trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    return _maximize(r, params, settings, Objective(omega), trials, seed, "CoopWithIrs")


def audit(r: ChannelRealization, sol: RecoveredSolution, params: SystemParams, tol=1e-6):
    return check_feasibility(r, sol.phases, params, sol.alloc, tol)


__all__ = [
    "MAXMIN", "Objective", "RecoveredSolution", "RelaxedSolution", "build_fixed_phase", "build_p3",
    "coop_rates_from_gains", "extract_phases", "gaussian_candidates", "lifted_matrix",
    "maximize_common_throughput", "maximize_weighted_sum", "phase_gains", "recover_v",
    "refit_allocation", "solve_relaxation",
]
