import dataclasses
import math

import numpy as np
import pytest
from conftest import random_phases
from hypothesis import given
from hypothesis import strategies as st

from irs_wpcn.channel import ChannelRealization, lift, sample_realization
from irs_wpcn.rates import (Allocation, IndependentAllocation, IndependentPhases, PhaseConfig,
                            SystemParams, check_feasibility, check_independent_feasibility,
                            evaluate, evaluate_independent, exchange_rates, harvested_energy,
                            joint_rates, lift_allocation, lifted_matrix, lifted_rates, plog2,
                            user_rates)


def _alloc(rng, scale=1e-5):
    t = rng.dirichlet(np.ones(5))
    return Allocation(*t, *rng.uniform(0, scale, 4))


def test_system_params_defaults():
    p = SystemParams.from_dbm()
    assert p.p_hap == pytest.approx(1.0)
    assert p.n0 == pytest.approx(1e-11)
    assert p.rho == pytest.approx(1e11)
    for bad in (dict(eta=0.0), dict(eta=1.0), dict(p_hap=0.0), dict(n0=-1.0)):
        with pytest.raises(ValueError):
            SystemParams(**bad)


def test_phase_config_unit_modulus():
    with pytest.raises(ValueError):
        PhaseConfig(np.ones(2), np.ones(2), np.ones(2), np.array([1.0, 1.1]))
    with pytest.raises(ValueError):
        PhaseConfig(np.ones(2), np.ones(3), np.ones(2), np.ones(2))
    PhaseConfig(*(np.exp(1j * np.array([0.1, 2.0])) for _ in range(4)))


def test_allocation_rejects_negative():
    with pytest.raises(ValueError):
        Allocation(t1=-0.1)


def test_plog2_limits():
    assert plog2(0.0, 5.0) == 0.0
    assert plog2(1e-9, 1.0) == pytest.approx(1e-9 * math.log2(1 + 1e9), rel=1e-12)
    assert plog2(1e-9, 1.0) < 4e-8
    assert plog2(1.0, 1.0) == 1.0


def test_harvested_zero_duration(draw, params):
    r = draw(3, 0)
    assert harvested_energy(r, np.ones(3), params, 0.0) == (0.0, 0.0)


def test_harvested_no_irs(draw, params):
    r = draw(0, 1)
    e1, e2 = harvested_energy(r, np.ones(0), params, 0.4)
    assert e1 == pytest.approx(0.8 * abs(r.alpha_1) ** 2 * 1.0 * 0.4, rel=1e-14)
    assert e2 == pytest.approx(0.8 * abs(r.alpha_2) ** 2 * 1.0 * 0.4, rel=1e-14)


def test_harvested_matches_lifted_n4(draw, params):
    r = draw(4, 2)
    v = np.exp(1j * np.array([0.3, 1.2, -2.0, 2.9]))
    e1, e2 = harvested_energy(r, v, params, 0.37)
    L, V = lift(r), lifted_matrix(v)
    k = params.eta * params.p_hap * 0.37
    assert e1 == pytest.approx(k * np.real(np.trace(L.psi_1 @ V)), rel=1e-12)
    assert e2 == pytest.approx(k * np.real(np.trace(L.psi_2 @ V)), rel=1e-12)


def test_harvested_rejects_non_unit_phase(draw, params):
    with pytest.raises(ValueError):
        harvested_energy(draw(2, 0), np.array([1.0, 0.5]), params, 0.5)


def test_exchange_zero_power(draw, params):
    r = draw(2, 3)
    a = Allocation(0.2, 0.3, 0.2, 0.1, 0.1, 0.0, 1e-5, 1e-5, 1e-5)
    r1_2, r0_21, r2_2, r0_22 = exchange_rates(r, np.ones(2), np.ones(2), params, a)
    assert r1_2 == 0.0 and r0_21 == 0.0
    assert r2_2 > 0 and r0_22 > 0


def test_exchange_hand_value(params):
    # Pinned channel draw without IRS.
    r = ChannelRealization(np.zeros(0), np.zeros(0), np.zeros(0),
                           alpha_1=3e-4 + 4e-4j, alpha_2=1e-4, alpha_12=-6e-4 + 8e-4j)
    a = Allocation(t21=0.3, p21=2e-6)
    r1_2, r0_21, _, _ = exchange_rates(r, np.ones(0), np.ones(0), params, a)
    # |alpha_12|^2 = 1e-6, |alpha_1|^2 = 2.5e-7, rho = 1e11
    assert r1_2 == pytest.approx(0.3 * math.log2(1 + 2e-6 * 1e-6 * 1e11), rel=1e-12)
    assert r0_21 == pytest.approx(0.3 * math.log2(1 + 2e-6 * 2.5e-7 * 1e11), rel=1e-12)


def test_joint_rates_symmetry_and_zero(draw, params):
    r = draw(3, 4)
    v = np.exp(1j * np.array([0.0, 1.0, 2.0]))
    a = Allocation(0.4, 0.1, 0.1, 0.2, 0.2, 1e-6, 1e-6, 2e-6, 3e-6)
    r1_3, r2_3 = joint_rates(r, v, params, a)
    assert r1_3 == r2_3 > 0
    z = dataclasses.replace(a, p31=0.0, p32=0.0)
    assert joint_rates(r, v, params, z) == (0.0, 0.0)


def test_user_rates_bottleneck():
    assert user_rates(1.0, 0.3, 0.4, 2.0, 0.5, 0.5)[0] == pytest.approx(0.7)
    assert user_rates(0, 0, 0, 0, 0, 0) == (0, 0, 0)
    r1, r2, m = user_rates(0.2, 0.3, 0.4, 2.0, 0.5, 0.5)
    assert (r1, r2, m) == (0.2, 1.0, 0.2)


def test_feasibility_zero_allocation(draw, params):
    r = draw(2, 5)
    rep = check_feasibility(r, PhaseConfig.ones(2), params, Allocation())
    assert rep.feasible and rep.time_slack == 1.0


def test_feasibility_detects_overspend(draw, params):
    r = draw(2, 6)
    ph = PhaseConfig.ones(2)
    e1, _ = harvested_energy(r, ph.v1, params, 0.5)
    a = Allocation(t1=0.5, t21=0.2, p21=2 * e1 / 0.2)
    rep = check_feasibility(r, ph, params, a)
    assert not rep.feasible
    assert rep.energy_slack[0] == pytest.approx(-1.0)
    assert rep.energy_slack[1] == 1.0 or rep.energy_slack[1] == 0.0


def test_feasibility_detects_time_overrun(draw, params):
    rep = check_feasibility(draw(1, 0), PhaseConfig.ones(1), params,
                            Allocation(0.6, 0.3, 0.3, 0.0, 0.0))
    assert not rep.feasible and rep.time_slack == pytest.approx(-0.2)


def _lifted_user_rates(r, ph, a, params):
    w, t, tau = lift_allocation(ph, a)
    lr = lifted_rates(lift(r), w, t, tau, params)
    return lr, user_rates(lr["r1_2"], lr["r0_21"], lr["r1_3"], lr["r2_2"], lr["r0_22"],
                          lr["r2_3"])


@given(n=st.integers(0, 8), seed=st.integers(0, 2**32))
def test_trace_form_rates_match(n, seed, geometry, model, params):
    rng = np.random.default_rng(seed)
    r = sample_realization(geometry, model, n, seed)
    ph, a = random_phases(rng, n), _alloc(rng)
    rep = evaluate(r, ph, params, a)
    lr, (r1, r2, _) = _lifted_user_rates(r, ph, a, params)
    for key in ("r1_2", "r0_21", "r2_2", "r0_22", "r1_3", "r2_3", "e1", "e2"):
        assert lr[key] == pytest.approx(getattr(rep, key), rel=1e-9, abs=1e-300)
    assert (r1, r2) == pytest.approx((rep.r1, rep.r2), rel=1e-9)
    used = (a.t21 * a.p21 + (a.t31 + a.t32) * a.p31, a.t22 * a.p22 + (a.t31 + a.t32) * a.p32)
    assert (lr["used1"], lr["used2"]) == pytest.approx(used, rel=1e-12)


@given(seed=st.integers(0, 2**32), field=st.sampled_from(
    ["t21", "t22", "t31", "t32", "p21", "p22", "p31", "p32"]), factor=st.floats(1.0, 3.0))
def test_rates_monotone_in_own_power_and_duration(seed, field, factor, geometry, model, params):
    rng = np.random.default_rng(seed)
    r = sample_realization(geometry, model, 3, seed)
    ph, a = random_phases(rng, 3), _alloc(rng)
    b = dataclasses.replace(a, **{field: getattr(a, field) * factor})
    ra, rb = evaluate(r, ph, params, a), evaluate(r, ph, params, b)
    own = {"t21": ["r1_2", "r0_21"], "p21": ["r1_2", "r0_21"], "t22": ["r2_2", "r0_22"],
           "p22": ["r2_2", "r0_22"], "t31": ["r1_3"], "t32": ["r2_3"],
           "p31": ["r1_3", "r2_3"], "p32": ["r1_3", "r2_3"]}[field]
    for key in own:
        assert getattr(rb, key) >= getattr(ra, key) - 1e-15


@given(seed=st.integers(0, 2**32))
def test_rho_invariance(seed, geometry, model, params):
    rng = np.random.default_rng(seed)
    r = sample_realization(geometry, model, 2, seed)
    ph, a = random_phases(rng, 2), _alloc(rng)
    p2 = dataclasses.replace(params, n0=2 * params.n0)
    a2 = dataclasses.replace(a, p21=2 * a.p21, p22=2 * a.p22, p31=2 * a.p31, p32=2 * a.p32)
    ra, rb = evaluate(r, ph, params, a), evaluate(r, ph, p2, a2)
    for key in ("r1_2", "r0_21", "r2_2", "r0_22", "r1_3", "r2_3", "r1", "r2"):
        assert getattr(rb, key) == pytest.approx(getattr(ra, key), rel=1e-12)


@given(seed=st.integers(0, 2**32))
def test_user_rate_never_exceeds_either_argument(seed, geometry, model, params):
    rng = np.random.default_rng(seed)
    r = sample_realization(geometry, model, 2, seed)
    rep = evaluate(r, random_phases(rng, 2), params, _alloc(rng))
    assert rep.r1 <= rep.r1_2 and rep.r1 <= rep.r0_21 + rep.r1_3
    assert rep.r2 <= rep.r2_2 and rep.r2 <= rep.r0_22 + rep.r2_3
    assert rep.min_rate == min(rep.r1, rep.r2) >= 0


def test_independent_protocol(draw, params):
    r = draw(2, 8)
    ph = IndependentPhases.ones(2)
    a = IndependentAllocation(0.5, 0.25, 0.25, 0.0, 0.0)
    rep = evaluate_independent(r, ph, params, a)
    assert rep.min_rate == 0.0 and rep.e1 > 0
    b = IndependentAllocation(0.5, 0.25, 0.25, rep.e1 / 0.25, rep.e2 / 0.25)
    assert check_independent_feasibility(r, ph, params, b).feasible
    c = dataclasses.replace(b, p1=2 * b.p1)
    assert not check_independent_feasibility(r, ph, params, c).feasible
    assert evaluate_independent(r, ph, params, b).min_rate > 0
