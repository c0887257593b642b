"""Forward model: harvested energy, per-phase rates and feasibility.

All rates are in bits/s/Hz over a unit horizon (T = 1). Two protocols are
modelled: the three-phase cooperation protocol (energy transfer, information
exchange, joint Alamouti transmission) and harvest-then-transmit with TDMA
uplink, which the benchmark schemes use.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelRealization, composite_gamma, dbm_to_watt

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    p_hap: float = 1.0
    eta: float = 0.8
    n0: float = 1e-11
    horizon: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not self.p_hap > 0 or not self.n0 > 0:
            raise ValueError("p_hap and n0 must be positive")

    @classmethod
    def from_dbm(cls, p_hap_dbm=30.0, eta=0.8, n0_dbm=-80.0):
        return cls(dbm_to_watt(p_hap_dbm), eta, dbm_to_watt(n0_dbm))

    @property
    def rho(self) -> float:
        return 1.0 / self.n0


def _unit(v, n: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] != n:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {n}")
    if v.size and np.max(np.abs(np.abs(v) - 1.0)) > UNIT_TOL:
        raise ValueError(f"{name} is not unit-modulus")
    return v


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """IRS phase vectors for energy transfer (v1), the two exchange slots
    (v2: WD1 talks, v3: WD2 talks) and joint transmission (v4)."""

    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    v4: np.ndarray

    def __post_init__(self):
        n = len(np.atleast_1d(self.v1))
        for f in fields(self):
            object.__setattr__(self, f.name, _unit(getattr(self, f.name), n, f.name))

    @property
    def n_elements(self) -> int:
        return len(self.v1)

    @classmethod
    def ones(cls, n: int) -> "PhaseConfig":
        e = np.ones(n, dtype=complex)
        return cls(e, e, e, e)


@dataclass(frozen=True)
class Allocation:
    t1: float = 0.0
    t21: float = 0.0
    t22: float = 0.0
    t31: float = 0.0
    t32: float = 0.0
    p21: float = 0.0
    p22: float = 0.0
    p31: float = 0.0
    p32: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    @property
    def durations(self) -> np.ndarray:
        return np.array([self.t1, self.t21, self.t22, self.t31, self.t32])


@dataclass(frozen=True)
class RateReport:
    e1: float
    e2: float
    r1_2: float
    r2_2: float
    r0_21: float
    r0_22: float
    r1_3: float
    r2_3: float
    r1: float
    r2: float
    min_rate: float


def plog2(t, x):
    """Perspective rate t*log2(1 + x/t), extended by 0 at t = 0."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    x = np.maximum(x, 0.0)
    safe = np.where(t > 0, t, 1.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ratio = x / safe
        direct = safe * np.log1p(ratio) / np.log(2.0)
        # Subnormal durations: x/t overflows, the difference of logs does not.
        split = safe * (np.log2(safe + x) - np.log2(safe))
    out = np.where(t > 0, np.where(ratio < 1e300, direct, split), 0.0)
    return out if out.ndim else float(out)


def link_gain(v, gamma, alpha) -> float:
    """|v . gamma + alpha|^2, the effective power gain through the IRS."""
    return float(abs(np.dot(v, gamma) + alpha) ** 2)


def harvested_energy(r: ChannelRealization, v1, params: SystemParams, t1: float):
    v1 = _unit(v1, r.n_elements, "v1")
    g1, g2, _, _ = composite_gamma(r)
    k = params.eta * params.p_hap * t1
    return k * link_gain(v1, g1, r.alpha_1), k * link_gain(v1, g2, r.alpha_2)


def exchange_rates(r: ChannelRealization, v2, v3, params: SystemParams, alloc: Allocation):
    """(R1_2, R0_21, R2_2, R0_22): device-to-device and device-to-HAP rates
    while each device broadcasts its own data in the exchange phase."""
    n = r.n_elements
    v2, v3 = _unit(v2, n, "v2"), _unit(v3, n, "v3")
    g1, g2, g21, g22 = composite_gamma(r)
    rho = params.rho
    r1_2 = plog2(alloc.t21, rho * alloc.p21 * alloc.t21 * link_gain(v2, g21, r.alpha_12))
    r0_21 = plog2(alloc.t21, rho * alloc.p21 * alloc.t21 * link_gain(v2, g1, r.alpha_1))
    r2_2 = plog2(alloc.t22, rho * alloc.p22 * alloc.t22 * link_gain(v3, g22, r.alpha_12))
    r0_22 = plog2(alloc.t22, rho * alloc.p22 * alloc.t22 * link_gain(v3, g2, r.alpha_2))
    return r1_2, r0_21, r2_2, r0_22


def joint_rates(r: ChannelRealization, v4, params: SystemParams, alloc: Allocation):
    v4 = _unit(v4, r.n_elements, "v4")
    g1, g2, _, _ = composite_gamma(r)
    snr = params.rho * (alloc.p31 * link_gain(v4, g1, r.alpha_1)
                        + alloc.p32 * link_gain(v4, g2, r.alpha_2))
    return alloc.t31 * np.log2(1.0 + snr), alloc.t32 * np.log2(1.0 + snr)


def user_rates(r1_2, r0_21, r1_3, r2_2, r0_22, r2_3):
    r1 = min(r1_2, r0_21 + r1_3)
    r2 = min(r2_2, r0_22 + r2_3)
    return r1, r2, min(r1, r2)


def evaluate(r: ChannelRealization, phases: PhaseConfig, params: SystemParams,
             alloc: Allocation) -> RateReport:
    e1, e2 = harvested_energy(r, phases.v1, params, alloc.t1)
    r1_2, r0_21, r2_2, r0_22 = exchange_rates(r, phases.v2, phases.v3, params, alloc)
    r1_3, r2_3 = joint_rates(r, phases.v4, params, alloc)
    r1, r2, m = user_rates(r1_2, r0_21, r1_3, r2_2, r0_22, r2_3)
    return RateReport(e1, e2, r1_2, r2_2, r0_21, r0_22, float(r1_3), float(r2_3), r1, r2, m)


@dataclass(frozen=True)
class FeasibilityReport:
    """Slacks are >= 0 when satisfied. Energy slacks are relative to the
    harvested energy, so they are dimensionless."""

    feasible: bool
    time_slack: float
    energy_slack: tuple
    energy_used: tuple
    energy_harvested: tuple

    @property
    def worst_slack(self) -> float:
        return min(self.time_slack, *self.energy_slack)


def _relative_slack(avail: float, used: float) -> float:
    if avail > 0:
        return (avail - used) / avail
    return 0.0 if used <= 0 else -np.inf


def _verdict(time_slack, harvested, used, tol) -> FeasibilityReport:
    slacks = tuple(_relative_slack(e, u) for e, u in zip(harvested, used))
    ok = time_slack >= -tol and all(s >= -tol for s in slacks)
    return FeasibilityReport(ok, time_slack, slacks, tuple(used), tuple(harvested))


def check_feasibility(r: ChannelRealization, phases: PhaseConfig, params: SystemParams,
                      alloc: Allocation, tol: float = 1e-6) -> FeasibilityReport:
    e1, e2 = harvested_energy(r, phases.v1, params, alloc.t1)
    t3 = alloc.t31 + alloc.t32
    used = (alloc.t21 * alloc.p21 + t3 * alloc.p31, alloc.t22 * alloc.p22 + t3 * alloc.p32)
    time_slack = params.horizon - float(alloc.durations.sum())
    return _verdict(time_slack, (e1, e2), used, tol)


def lifted_vector(v) -> np.ndarray:
    """[conj(v); 1], chosen so that tr(psi v_bar v_bar^H) = |v . gamma + alpha|^2."""
    return np.append(np.conj(np.asarray(v, dtype=complex)), 1.0)


def lifted_matrix(v) -> np.ndarray:
    vb = lifted_vector(v)
    return np.outer(vb, vb.conj())


def trace_form(psi: np.ndarray, w: np.ndarray) -> float:
    return float(np.real(np.sum(psi * w.T)))


def lifted_rates(lifted, w: dict, t: dict, tau: dict, params: SystemParams) -> dict:
    """Rates and energies written over lifted matrices W = scale * V.

    ``w`` holds W1, W2, W3, W41, W41p, W42, W42p; ``tau`` holds the energy
    variables with keys 21, 22, 31, 31p, 32, 32p.
    """
    rho = params.rho
    tr = trace_form
    out = {
        "r1_2": plog2(t["21"], rho * tr(lifted.psi_21, w["W2"])),
        "r0_21": plog2(t["21"], rho * tr(lifted.psi_1, w["W2"])),
        "r2_2": plog2(t["22"], rho * tr(lifted.psi_22, w["W3"])),
        "r0_22": plog2(t["22"], rho * tr(lifted.psi_2, w["W3"])),
        "r1_3": plog2(t["31"], rho * (tr(lifted.psi_1, w["W41"]) + tr(lifted.psi_2, w["W42p"]))),
        "r2_3": plog2(t["32"], rho * (tr(lifted.psi_1, w["W41p"]) + tr(lifted.psi_2, w["W42"]))),
        "e1": params.eta * params.p_hap * tr(lifted.psi_1, w["W1"]),
        "e2": params.eta * params.p_hap * tr(lifted.psi_2, w["W1"]),
    }
    out["used1"] = tau["21"] + tau["31"] + tau["31p"]
    out["used2"] = tau["22"] + tau["32"] + tau["32p"]
    return out


def lift_allocation(phases: PhaseConfig, alloc: Allocation):
    """Map (phases, allocation) to the lifted variables ``(w, t, tau)``.

    Energies are ``tau = t * P``; primes mark a device's energy spent in the
    other device's joint-transmission slot.
    """
    tau = {"21": alloc.t21 * alloc.p21, "22": alloc.t22 * alloc.p22,
           "31": alloc.t31 * alloc.p31, "31p": alloc.t32 * alloc.p31,
           "32": alloc.t32 * alloc.p32, "32p": alloc.t31 * alloc.p32}
    v4 = lifted_matrix(phases.v4)
    w = {"W1": alloc.t1 * lifted_matrix(phases.v1), "W2": tau["21"] * lifted_matrix(phases.v2),
         "W3": tau["22"] * lifted_matrix(phases.v3), "W41": tau["31"] * v4,
         "W41p": tau["31p"] * v4, "W42": tau["32"] * v4, "W42p": tau["32p"] * v4}
    t = {"1": alloc.t1, "21": alloc.t21, "22": alloc.t22, "31": alloc.t31, "32": alloc.t32}
    return w, t, tau


# Harvest-then-transmit (benchmarks).


@dataclass(frozen=True, eq=False)
class IndependentPhases:
    v_e: np.ndarray
    v_1: np.ndarray
    v_2: np.ndarray

    def __post_init__(self):
        n = len(np.atleast_1d(self.v_e))
        for f in fields(self):
            object.__setattr__(self, f.name, _unit(getattr(self, f.name), n, f.name))

    @property
    def n_elements(self) -> int:
        return len(self.v_e)

    @classmethod
    def ones(cls, n: int) -> "IndependentPhases":
        e = np.ones(n, dtype=complex)
        return cls(e, e, e)


@dataclass(frozen=True)
class IndependentAllocation:
    t0: float = 0.0
    t1: float = 0.0
    t2: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    @property
    def durations(self) -> np.ndarray:
        return np.array([self.t0, self.t1, self.t2])


@dataclass(frozen=True)
class IndependentRateReport:
    e1: float
    e2: float
    r1: float
    r2: float
    min_rate: float


def evaluate_independent(r: ChannelRealization, phases: IndependentPhases,
                         params: SystemParams, alloc: IndependentAllocation):
    g1, g2, _, _ = composite_gamma(r)
    k = params.eta * params.p_hap * alloc.t0
    e1 = k * link_gain(phases.v_e, g1, r.alpha_1)
    e2 = k * link_gain(phases.v_e, g2, r.alpha_2)
    rho = params.rho
    r1 = plog2(alloc.t1, rho * alloc.t1 * alloc.p1 * link_gain(phases.v_1, g1, r.alpha_1))
    r2 = plog2(alloc.t2, rho * alloc.t2 * alloc.p2 * link_gain(phases.v_2, g2, r.alpha_2))
    return IndependentRateReport(e1, e2, r1, r2, min(r1, r2))


def check_independent_feasibility(r: ChannelRealization, phases: IndependentPhases,
                                  params: SystemParams, alloc: IndependentAllocation,
                                  tol: float = 1e-6) -> FeasibilityReport:
    rep = evaluate_independent(r, phases, params, alloc)
    used = (alloc.t1 * alloc.p1, alloc.t2 * alloc.p2)
    time_slack = params.horizon - float(alloc.durations.sum())
    return _verdict(time_slack, (rep.e1, rep.e2), used, tol)
