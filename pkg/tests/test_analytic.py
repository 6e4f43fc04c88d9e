import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigstorm.analytic import (DerivedQuantities, evaluate_loads, gamma_c, gamma_r, state_weights,
                               stationary_distribution)
from sigstorm.model import UMTS_COSTS, MAIN_STATES, ModelParams, State, build_transition_table, with_pch
from sigstorm.oracle import oracle_solve
from sigstorm.presets import FIG2, FIG4

rate = st.floats(1e-4, 10.0)
maybe_zero = st.one_of(st.just(0.0), rate)
params = st.builds(ModelParams, lambda_L=maybe_zero, lambda_H=maybe_zero, mu_L=rate, mu_H=rate,
                   alpha_L=maybe_zero, alpha_H=maybe_zero, tau_L=rate, tau_H=rate, tau_P=rate)


@settings(max_examples=200, deadline=None)
@given(params, st.booleans())
def test_weighted_probabilities_sum_to_one(p, pch):
    c = with_pch(UMTS_COSTS, pch)
    d = stationary_distribution(p, c)
    assert d.normalisation() == pytest.approx(1.0, rel=1e-12)
    assert all(v >= 0 for v in d.pi.values())
    occ = evaluate_loads(p, c).occupancy
    assert occ.total() == pytest.approx(1.0, rel=1e-12)


def test_derived_quantities():
    p = FIG2.with_attack(0.01, 0.02)
    dq = DerivedQuantities.from_params(p)
    assert dq.Lambda == pytest.approx(p.lambda_L + p.lambda_H + 0.03)
    assert dq.q_L == pytest.approx(p.lambda_L / (p.lambda_H + p.mu_L))
    assert dq.rho_L == pytest.approx(p.lambda_L / (dq.Lambda_H + p.mu_L))
    assert dq.q_H == pytest.approx(p.lambda_H / p.mu_H)


def test_weights_account_for_signalling_time():
    w = state_weights(FIG2, UMTS_COSTS)
    # per second in P: release at tau_P (0.3 s), promotions to FACH (0.15 s) and DCH (0.5 s)
    assert w.P == pytest.approx(1 + FIG2.tau_P * 0.3 + FIG2.lambda_L * 0.15 + FIG2.lambda_H * 0.5)
    assert w.D == pytest.approx(1 + FIG2.lambda_L * 0.75 + FIG2.lambda_H * 1.0)
    assert w[State.H] == w[State.eta] == 1.0
    assert w[State.h_A] == w[State.h] and w[State.ell_A] == w[State.ell]


def test_pch_disabled_has_no_paging_mass():
    d = stationary_distribution(FIG2.with_attack(0.1, 0.1), with_pch(UMTS_COSTS, False))
    assert d.pi[State.P] == 0.0
    assert state_weights(FIG2, with_pch(UMTS_COSTS, False)).P == 1.0


def test_no_low_bandwidth_traffic_is_regular():
    p = ModelParams(lambda_L=0.0, lambda_H=1 / 600, mu_L=0.2, mu_H=1 / 120, alpha_H=0.05)
    d = stationary_distribution(p, UMTS_COSTS)
    red, g_r, g_c = oracle_solve(build_transition_table(p, UMTS_COSTS))
    assert d.pi[State.L] == 0.0
    for s in MAIN_STATES:
        assert d.pi[s] == pytest.approx(red.pi[s], rel=1e-12, abs=1e-300)
    assert gamma_c(p, UMTS_COSTS) == pytest.approx(g_c, rel=1e-12)


def test_infinite_burst_rate_rejected():
    with pytest.raises(ValueError, match="limit"):
        stationary_distribution(FIG2.with_attack(math.inf, 0), UMTS_COSTS)


@pytest.mark.parametrize("k", [60.0, 1 / 7])
def test_time_unit_change_scales_loads(costs, k):
    p = FIG2.with_attack(0.01, 0.03)
    base_r, base_c = gamma_r(p, costs), gamma_c(p, costs)
    sc = costs.scaled_delays(1 / k)
    assert gamma_r(p.scaled(k), sc) == pytest.approx(k * base_r, rel=1e-12)
    assert gamma_c(p.scaled(k), sc) == pytest.approx(k * base_c, rel=1e-12)


def test_loads_linear_in_message_counts(costs):
    p = FIG2.with_attack(0.02, 0.01)
    assert gamma_r(p, costs.scaled_counts(3)) == pytest.approx(3 * gamma_r(p, costs), rel=1e-13)


def test_idle_ue_generates_no_core_load_without_traffic():
    p = ModelParams(lambda_L=0.0, lambda_H=0.0, mu_L=0.2, mu_H=0.01)
    d = stationary_distribution(p, UMTS_COSTS)
    assert d.pi[State.D] == pytest.approx(1.0)
    assert gamma_c(p, UMTS_COSTS) == gamma_r(p, UMTS_COSTS) == 0.0


def test_active_share_of_non_signalling_time_ignores_high_bursts():
    # high-bandwidth bursts carry no data: the data-carrying share of the
    # time not spent signalling is unchanged by alpha_H
    ratios = []
    for a in np.linspace(0, 1, 21):
        occ = evaluate_loads(FIG4.with_attack(0.0, float(a)), UMTS_COSTS).occupancy
        ratios.append(occ.active / (1 - occ.signalling))
    assert np.ptp(ratios) <= 1e-12 * ratios[0]
