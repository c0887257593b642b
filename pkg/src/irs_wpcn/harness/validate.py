"""Invariant audit on random instances (the ``validate`` CLI verb)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..baselines import SchemeId, audit_solution, run_scheme
from ..channel import lift, make_rng, sample_realization
from ..engine import validate_solution
from ..rates import (Allocation, PhaseConfig, evaluate, lift_allocation, lifted_rates,
                     user_rates)
from ..sdr import build_p3
from .config import ExperimentConfig


@dataclass
class ValidationReport:
    instances: int
    checks: dict = field(default_factory=dict)  # name -> [passed, total]
    failures: list = field(default_factory=list)

    def record(self, name: str, ok: bool, detail: str = ""):
        c = self.checks.setdefault(name, [0, 0])
        c[0] += bool(ok)
        c[1] += 1
        if not ok:
            self.failures.append(f"{name}: {detail}")

    @property
    def ok(self) -> bool:
        return not self.failures


def random_phases(rng, n: int) -> PhaseConfig:
    return PhaseConfig(*(np.exp(1j * rng.uniform(0, 2 * np.pi, n)) for _ in range(4)))


def random_allocation(rng) -> Allocation:
    t = rng.dirichlet(np.ones(5))
    p = rng.uniform(0.0, 1e-5, 4)
    return Allocation(*t, *p)


def lifting_mismatch(r, phases, alloc, params) -> float:
    """Largest relative difference between modulus-form and trace-form rates."""
    rep = evaluate(r, phases, params, alloc)
    w, t, tau = lift_allocation(phases, alloc)
    lr = lifted_rates(lift(r), w, t, tau, params)
    r1, r2, _ = user_rates(lr["r1_2"], lr["r0_21"], lr["r1_3"], lr["r2_2"], lr["r0_22"],
                           lr["r2_3"])
    pairs = [(rep.r1_2, lr["r1_2"]), (rep.r0_21, lr["r0_21"]), (rep.r2_2, lr["r2_2"]),
             (rep.r0_22, lr["r0_22"]), (rep.r1_3, lr["r1_3"]), (rep.r2_3, lr["r2_3"]),
             (rep.e1, lr["e1"]), (rep.e2, lr["e2"]), (rep.r1, r1), (rep.r2, r2)]
    return max(abs(a - b) / max(abs(a), abs(b), 1e-300) for a, b in pairs)


def run_validation(config: ExperimentConfig, instances: int = 20, seed: int = 0,
                   max_elements: int = 6) -> ValidationReport:
    rng = make_rng(seed, stream=7)
    params, settings = config.params(), config.settings()
    rep = ValidationReport(instances)
    for k in range(instances):
        n = int(rng.integers(1, max_elements + 1))
        r = sample_realization(config.geometry(), config.path_loss_model(), n,
                               int(rng.integers(0, 2**63)))
        mm = lifting_mismatch(r, random_phases(rng, n), random_allocation(rng), params)
        rep.record("lifting", mm <= 1e-9, f"instance {k}: relative mismatch {mm:.3g}")
        problem, _ = build_p3(lift(r), params)
        for scheme in SchemeId:
            sol = run_scheme(scheme, r, params, settings, trials=config.trials, seed=k)
            feas = audit_solution(r, sol, params)
            rep.record(f"feasible[{scheme.value}]", feas.feasible,
                       f"instance {k}: worst slack {feas.worst_slack:.3g}")
            rep.record(f"bound[{scheme.value}]", sol.objective_value <= sol.r_bar_star + 1e-6,
                       f"instance {k}: {sol.objective_value:.9g} > {sol.r_bar_star:.9g}")
            if scheme is SchemeId.COOP_WITH_IRS and sol.relaxed is not None:
                audit = validate_solution(problem, sol.relaxed.raw, settings.feasibility_tol * 100)
                rep.record("relaxation-audit", audit.ok(settings.feasibility_tol * 100),
                           f"instance {k}: worst violation {audit.worst_violation:.3g}")
    return rep
