import math
from dataclasses import replace

import pytest

from sigstorm.model import (ATTACK_STATES, UMTS_COSTS, ModelParams, State, build_transition_table,
                            pch_disabled_projection, reachable_states, validate_params, with_pch)
from sigstorm.presets import FIG2


def test_default_umts_costs():
    c = UMTS_COSTS
    assert (c.n_DL, c.m_DL, c.sigma_inv_DL) == (15, 5, 0.75)
    assert (c.n_PL, c.m_PL, c.sigma_inv_PL) == (3, 0, 0.15)
    assert (c.n_DH, c.m_DH, c.sigma_inv_DH) == (20, 5, 1.0)
    assert (c.n_PH, c.m_PH, c.sigma_inv_PH) == (10, 0, 0.5)
    assert (c.n_LH, c.m_LH, c.sigma_inv_LH) == (7, 0, 0.35)
    assert (c.n_HL, c.m_HL, c.sigma_inv_HL) == (5, 0, 0.25)
    assert (c.n_LP, c.m_LP, c.sigma_inv_LP) == (2, 0, 0.1)
    assert (c.n_PD, c.m_PD, c.sigma_inv_PD) == (6, 2, 0.3)
    assert c.sigma_inv_release == pytest.approx(0.15)
    assert c.pch_enabled


def test_valid_defaults_have_no_problems():
    assert validate_params(FIG2, UMTS_COSTS) == []
    assert validate_params(FIG2, with_pch(UMTS_COSTS, False)) == []


@pytest.mark.parametrize("field,value,needle", [
    ("mu_L", 0.0, "mu_L must be > 0"),
    ("lambda_H", -1.0, "lambda_H must be >= 0"),
    ("tau_H", math.inf, "tau_H must be finite"),
    ("lambda_L", math.nan, "lambda_L must be a number"),
])
def test_rate_violations(field, value, needle):
    assert needle in validate_params(replace(FIG2, **{field: value}), UMTS_COSTS)


def test_cost_violations():
    probs = validate_params(FIG2, replace(UMTS_COSTS, m_DL=16))
    assert any("m_XY ≤ n_XY violated for D→L" in p for p in probs)
    assert any("sigma_inv_LH must be > 0" in p
               for p in validate_params(FIG2, replace(UMTS_COSTS, sigma_inv_LH=0)))
    assert any("does not touch IDLE" in p
               for p in validate_params(FIG2, replace(UMTS_COSTS, n_LH=7, m_LH=1)))
    assert any("sigma_inv_PD" in p
               for p in validate_params(FIG2, replace(UMTS_COSTS, sigma_inv_PD=0.1)))


def test_pch_only_delays_ignored_when_pch_disabled():
    c = replace(with_pch(UMTS_COSTS, False), sigma_inv_LP=0.0, sigma_inv_PL=0.0, sigma_inv_PD=0.0)
    assert validate_params(FIG2, c) == []


def test_tau_p_zero_only_matters_with_pch():
    p = replace(FIG2, tau_P=0.0)
    assert "tau_P must be > 0 when PCH is enabled" in validate_params(p, UMTS_COSTS)
    assert validate_params(p, with_pch(UMTS_COSTS, False)) == []


def test_transition_table_structure():
    p = FIG2.with_attack(0.01, 0.02)
    on = build_transition_table(p, UMTS_COSTS)
    off = build_transition_table(p, with_pch(UMTS_COSTS, False))
    assert State.P in on.states and State.P not in off.states
    assert all(e.source != State.P and e.target != State.P for e in off.edges)
    release = [e for e in on.edges if e.source == State.P and e.target == State.D]
    assert len(release) == 1
    assert sum(release[0].segments) == pytest.approx(UMTS_COSTS.sigma_inv_PD)
    assert (release[0].n_cost, release[0].m_cost) == (6, 2)
    demote = [e for e in off.edges if e.target == State.D]
    assert {e.source for e in demote} == {State.ell, State.ell_A}
    assert all(e.segments == (0.3,) and e.m_cost == 2 for e in demote)


def test_instantaneous_edges_cost_nothing():
    t = build_transition_table(FIG2, UMTS_COSTS)
    for e in t.edges:
        if not e.segments:
            assert e.n_cost == e.m_cost == 0


def test_zero_rate_edges_dropped_and_attack_states_unreachable():
    t = build_transition_table(FIG2, UMTS_COSTS)
    assert all(e.rate > 0 for e in t.edges)
    reach = reachable_states(t)
    assert not reach & set(ATTACK_STATES)
    assert reachable_states(build_transition_table(FIG2.with_attack(0.1, 0.1), UMTS_COSTS)) == set(State)


def test_infinite_burst_rate_rejected():
    with pytest.raises(ValueError):
        build_transition_table(FIG2.with_attack(math.inf, 0), UMTS_COSTS)


def test_pch_projection():
    off = pch_disabled_projection(UMTS_COSTS, sigma_inv_LD=0.5)
    assert not off.pch_enabled and off.sigma_inv_LD == 0.5
    with pytest.raises(ValueError, match="already disabled"):
        pch_disabled_projection(off)
    assert with_pch(UMTS_COSTS, True) is UMTS_COSTS


def test_scaled_params_change_time_unit():
    p = FIG2.with_attack(0.1, 0.2).scaled(60)
    assert p.mu_L == pytest.approx(12.0) and p.alpha_H == pytest.approx(12.0)
    assert not p.has_infinite_rate
    assert ModelParams(1, 1, 1, 1, alpha_L=math.inf).has_infinite_rate
