"""Benchmark schemes.

* IndepWithIrs -- harvest-then-transmit: energy slot ``t0`` with IRS phase
  ``v_e``, then WD1 and WD2 upload in turn (``t1``, ``t2``) with their own
  IRS phases. Lifted exactly like the cooperative problem, with blocks
  ``WE = t0 V_e`` and ``WIi = tau_i V_i``.
* CoopNoIrs -- the three-phase cooperative protocol over direct links only.
* IndepNoIrs -- harvest-then-transmit over direct links only.

Rates: ``R_i = t_i log2(1 + rho tau_i |v_i . gamma_i + alpha_i|^2 / t_i)`` with
``tau_i <= eta P1 t0 |v_e . gamma_i + alpha_i|^2``.
"""

from __future__ import annotations

import enum
import time

import numpy as np

from . import engine
from .channel import ChannelRealization, composite_gamma, lift, make_rng
from .engine import Affine, ConeProblem, PerspectiveLogTerm, SolverSettings, trace, var
from .rates import (IndependentAllocation, IndependentPhases, PhaseConfig, SystemParams,
                    check_independent_feasibility, evaluate_independent, plog2)
from .sdr import (DEFAULT_TRIALS, MAXMIN, Objective, ProblemScaling, RecoveredSolution,
                  _batch_gain, _energy_unit, gaussian_candidates, maximize_common_throughput,
                  maximize_weighted_sum, recover_v, refit_allocation)


class SchemeId(str, enum.Enum):
    COOP_WITH_IRS = "CoopWithIrs"
    INDEP_WITH_IRS = "IndepWithIrs"
    COOP_NO_IRS = "CoopNoIrs"
    INDEP_NO_IRS = "IndepNoIrs"


IND_PINS = {"WE": "t0", "WI1": "tau1", "WI2": "tau2"}


def _independent_problem(form, e_scale, kappa, objective: Objective):
    p = ConeProblem()
    t0, t1, t2 = p.scalar("t0"), p.scalar("t1"), p.scalar("t2")
    tau1, tau2 = p.scalar("tau1"), p.scalar("tau2")
    p.le(t0 + t1 + t2 - 1.0, name="time")
    p.le(tau1 - (1.0 / e_scale) * form("WE", "1"), name="energy1")
    p.le(tau2 - (1.0 / e_scale) * form("WE", "2"), name="energy2")
    up1 = PerspectiveLogTerm("t1", kappa * form("WI1", "1"))
    up2 = PerspectiveLogTerm("t2", kappa * form("WI2", "2"))
    if objective.omega is None:
        p.scalar("rbar", nonneg=False)
        p.hypograph("rbar", [up1], "R1")
        p.hypograph("rbar", [up2], "R2")
        p.maximize("rbar")
    else:
        p.scalar("r1", nonneg=False)
        p.scalar("r2", nonneg=False)
        p.scalar("wsr", nonneg=False)
        p.hypograph("r1", [up1], "R1")
        p.hypograph("r2", [up2], "R2")
        p.le(var("wsr") - objective.omega * var("r1") - (1.0 - objective.omega) * var("r2"),
             name="objective")
        p.maximize("wsr")
    return p


def build_independent_relaxation(r: ChannelRealization, params: SystemParams,
                                 objective: Objective = MAXMIN):
    L = lift(r)
    psi = {"1": L.psi_1, "2": L.psi_2}
    e_unit, s = _energy_unit([np.real(np.trace(L.psi_1)), np.real(np.trace(L.psi_2))], params)
    kappa = params.rho * e_unit

    def form(block, key):
        return trace(block, psi[key])

    p = _independent_problem(form, s, kappa, objective)
    for m, pin in IND_PINS.items():
        p.matrix(m, L.dim)
        p.pin_diagonal(m, pin)
    p.check()
    return p, ProblemScaling(e_unit, s, kappa)


def independent_gains(r: ChannelRealization, phases: IndependentPhases) -> dict:
    g1, g2, _, _ = composite_gamma(r)

    def h(v, g, a):
        return float(abs(np.dot(v, g) + a) ** 2)

    return {"e1": h(phases.v_e, g1, r.alpha_1), "e2": h(phases.v_e, g2, r.alpha_2),
            "h1": h(phases.v_1, g1, r.alpha_1), "h2": h(phases.v_2, g2, r.alpha_2)}


_IND_FORMS = {("WE", "1"): "e1", ("WE", "2"): "e2", ("WI1", "1"): "h1", ("WI2", "2"): "h2"}


def build_independent_fixed(gains: dict, params: SystemParams, objective: Objective = MAXMIN):
    e_unit, s = _energy_unit([gains["e1"], gains["e2"]], params)
    kappa = params.rho * e_unit

    def form(block, key):
        return gains[_IND_FORMS[(block, key)]] * var(IND_PINS[block])

    p = _independent_problem(form, s, kappa, objective)
    p.check()
    return p, ProblemScaling(e_unit, s, kappa)


def independent_rates_from_gains(t, tau, gains, params: SystemParams):
    """Vectorised (R1, R2) with power scaling to the harvested budget."""
    k = params.eta * params.p_hap * t[0]
    e1, e2 = k * np.asarray(gains["e1"]), k * np.asarray(gains["e2"])
    s1 = np.where(tau[0] > e1, e1 / max(tau[0], 1e-300), 1.0)
    s2 = np.where(tau[1] > e2, e2 / max(tau[1], 1e-300), 1.0)
    r1 = plog2(t[1], params.rho * s1 * tau[0] * np.asarray(gains["h1"]))
    r2 = plog2(t[2], params.rho * s2 * tau[1] * np.asarray(gains["h2"]))
    return r1, r2


def refit_independent(r: ChannelRealization, phases: IndependentPhases, params: SystemParams,
                      settings: SolverSettings = SolverSettings(),
                      objective: Objective = MAXMIN):
    gains = independent_gains(r, phases)
    prob, sc = build_independent_fixed(gains, params, objective)
    sol = engine.solve(prob, settings)
    if not sol.scalars:
        alloc = IndependentAllocation()
        return alloc, evaluate_independent(r, phases, params, alloc), 0.0
    x = sol.scalars
    t = [max(x[k], 0.0) for k in ("t0", "t1", "t2")]
    total = sum(t)
    if total > params.horizon:
        t = [v * params.horizon / total for v in t]
    tau = [max(x[k], 0.0) * sc.energy_unit for k in ("tau1", "tau2")]
    k = params.eta * params.p_hap * t[0]
    budget = (k * gains["e1"], k * gains["e2"])
    p = []
    for ti, taui, e in zip(t[1:], tau, budget):
        taui = min(taui, e)
        p.append(taui / ti if ti > 0 else 0.0)
    alloc = IndependentAllocation(t[0], t[1], t[2], p[0], p[1])
    return alloc, evaluate_independent(r, phases, params, alloc), float(sol.objective)


def _independent(r: ChannelRealization, params: SystemParams, settings: SolverSettings,
                 objective: Objective, trials: int, seed: int, scheme: str) -> RecoveredSolution:
    t_start = time.perf_counter()
    n = r.n_elements
    if n == 0:
        phases = IndependentPhases.ones(0)
        alloc, rep, value = refit_independent(r, phases, params, settings, objective)
        obj = float(objective(rep.r1, rep.r2))
        return RecoveredSolution(scheme, "optimal", phases, alloc, rep, max(value, obj), obj,
                                 objective, None,
                                 info={"total_time": time.perf_counter() - t_start})
    prob, sc = build_independent_relaxation(r, params, objective)
    sol = engine.solve(prob, settings)
    if not sol.scalars:
        phases = IndependentPhases.ones(n)
        alloc = IndependentAllocation()
        rep = evaluate_independent(r, phases, params, alloc)
        return RecoveredSolution(scheme, sol.status, phases, alloc, rep, float("nan"), 0.0,
                                 objective, sol)
    x = sol.scalars
    t = [max(x[k], 0.0) for k in ("t0", "t1", "t2")]
    tau = [max(x[k], 0.0) * sc.energy_unit for k in ("tau1", "tau2")]
    L = lift(r)
    g1, g2, _, _ = composite_gamma(r)
    W = {m: sol.matrices[m] * (1.0 if m == "WE" else sc.energy_unit) for m in IND_PINS}
    norms = {"WE": t[0], "WI1": tau[0], "WI2": tau[1]}

    def rel_gain(m, psi):
        return float(np.real(np.sum(psi * W[m].T))) / norms[m] if norms[m] > 0 else 0.0

    gains = {"e1": rel_gain("WE", L.psi_1), "e2": rel_gain("WE", L.psi_2),
             "h1": rel_gain("WI1", L.psi_1), "h2": rel_gain("WI2", L.psi_2)}
    draws = gaussian_candidates(n + 1, trials, make_rng(seed, stream=2))
    plan = [
        ("v_e", "WE", lambda vs: {"e1": _batch_gain(vs, g1, r.alpha_1),
                                  "e2": _batch_gain(vs, g2, r.alpha_2)}),
        ("v_1", "WI1", lambda vs: {"h1": _batch_gain(vs, g1, r.alpha_1)}),
        ("v_2", "WI2", lambda vs: {"h2": _batch_gain(vs, g2, r.alpha_2)}),
    ]
    out, scores = {}, {}
    for name, block, update in plan:
        if norms[block] <= 0:
            v = np.ones(n, dtype=complex)
        else:
            def f(vs, update=update):
                gg = dict(gains)
                gg.update(update(vs))
                return objective(*independent_rates_from_gains(t, tau, gg, params))

            res = recover_v(W[block] / norms[block], f, draws=draws)
            v, scores[name] = res.v, res.score
        gains.update({k: float(np.asarray(val).reshape(-1)[0])
                      for k, val in update(v[:, None]).items()})
        out[name] = v
    phases = IndependentPhases(out["v_e"], out["v_1"], out["v_2"])
    alloc, rep, _ = refit_independent(r, phases, params, settings, objective)
    obj = float(objective(rep.r1, rep.r2))
    ub = sol.upper_bound if np.isfinite(sol.upper_bound) else sol.objective
    return RecoveredSolution(scheme, sol.status, phases, alloc, rep, float(ub), obj, objective,
                             sol, info={"randomization_scores": scores,
                                        "total_time": time.perf_counter() - t_start})


def indep_with_irs(r: ChannelRealization, params: SystemParams,
                   settings: SolverSettings = SolverSettings(), objective: Objective = MAXMIN,
                   trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    return _independent(r, params, settings, objective, trials, seed, SchemeId.INDEP_WITH_IRS.value)


def indep_no_irs(r: ChannelRealization, params: SystemParams,
                 settings: SolverSettings = SolverSettings(), objective: Objective = MAXMIN,
                 trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    return _independent(r.without_irs(), params, settings, objective, trials, seed,
                        SchemeId.INDEP_NO_IRS.value)


def coop_no_irs(r: ChannelRealization, params: SystemParams,
                settings: SolverSettings = SolverSettings(), objective: Objective = MAXMIN,
                trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    t_start = time.perf_counter()
    r0 = r.without_irs()
    phases = PhaseConfig.ones(0)
    alloc, rep, value = refit_allocation(r0, phases, params, settings, objective)
    obj = float(objective(rep.r1, rep.r2))
    return RecoveredSolution(SchemeId.COOP_NO_IRS.value, "optimal", phases, alloc, rep,
                             max(value, obj), obj, objective, None,
                             info={"total_time": time.perf_counter() - t_start})


def coop_with_irs(r: ChannelRealization, params: SystemParams,
                  settings: SolverSettings = SolverSettings(), objective: Objective = MAXMIN,
                  trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    if objective.omega is None:
        return maximize_common_throughput(r, params, settings, trials, seed)
    return maximize_weighted_sum(r, params, objective.omega, settings, trials, seed)


SCHEMES = {
    SchemeId.COOP_WITH_IRS: coop_with_irs,
    SchemeId.INDEP_WITH_IRS: indep_with_irs,
    SchemeId.COOP_NO_IRS: coop_no_irs,
    SchemeId.INDEP_NO_IRS: indep_no_irs,
}


def run_scheme(scheme: SchemeId | str, r: ChannelRealization, params: SystemParams,
               settings: SolverSettings = SolverSettings(), objective: Objective = MAXMIN,
               trials: int = DEFAULT_TRIALS, seed: int = 0) -> RecoveredSolution:
    return SCHEMES[SchemeId(scheme)](r, params, settings, objective, trials, seed)


def audit_solution(r: ChannelRealization, sol: RecoveredSolution, params: SystemParams,
                   tol: float = 1e-6):
    """Protocol-appropriate feasibility audit of any scheme's output."""
    if isinstance(sol.phases, IndependentPhases):
        rr = r if sol.phases.n_elements == r.n_elements else r.without_irs()
        return check_independent_feasibility(rr, sol.phases, params, sol.alloc, tol)
    from .rates import check_feasibility

    rr = r if sol.phases.n_elements == r.n_elements else r.without_irs()
    return check_feasibility(rr, sol.phases, params, sol.alloc, tol)
