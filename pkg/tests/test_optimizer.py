import math

import numpy as np
import pytest

from sigstorm.analytic import gamma_c, gamma_r
from sigstorm.model import UMTS_COSTS, ModelParams, with_pch
from sigstorm.optimizer import (Policy, core_alpha_H_hat, core_optimal_alpha_L,
                                depressed_cubic_real_roots, optimize_all, radio_limit_load,
                                radio_optimal_bursts, theta_quantities)
from sigstorm.oracle import argmax_scan
from sigstorm.presets import FIG2, FIG3, FIG4, FIG5
from sigstorm.verify import random_params

OFF = with_pch(UMTS_COSTS, False)


def _scan_alpha_L(p, c):
    return argmax_scan(lambda a: gamma_c(p.with_attack(a, 0.0), c), 0.0, 1.0, 400, 80)


def test_theta_quantities_at_fig3():
    th = theta_quantities(FIG3, UMTS_COSTS)
    busy = (1 + FIG3.lambda_L / (FIG3.lambda_H + FIG3.mu_L)) * (1 + FIG3.lambda_H / FIG3.mu_H)
    assert th.theta_LH == pytest.approx(0.35 + busy * 5 + 0.25)
    assert th.theta_PL == pytest.approx(0.15 + busy * 5 + 0.1)
    assert th.theta_PLH > th.theta_PL


def test_fig3_low_bandwidth_optimum():
    r = core_optimal_alpha_L(FIG3, UMTS_COSTS)
    assert r.policy is Policy.FINITE and r.alpha_H_star == 0.0
    assert r.alpha_L_star == pytest.approx(0.02, abs=0.005)
    x, fx = _scan_alpha_L(FIG3, UMTS_COSTS)
    assert r.alpha_L_star == pytest.approx(x, rel=1e-3)
    assert r.gamma_star >= 0.99999 * fx


def test_low_bandwidth_optimum_is_near_optimal_on_random_sets():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 40:
        p = random_params(rng, 1e-3, 1.0, zero_prob=0.0).with_attack(0, 0)
        r = core_optimal_alpha_L(p, UMTS_COSTS)
        if r.no_profitable_attack:
            continue
        _, fx = argmax_scan(lambda a: gamma_c(p.with_attack(a, 0.0), UMTS_COSTS),
                            0.0, 20 * r.alpha_L_star, 200, 60)
        # the load is near-maximal even where the location drifts (small mu_L)
        assert r.gamma_star >= 0.999 * fx
        checked += 1


def test_negative_radicand_means_no_profitable_attack():
    p = ModelParams(lambda_L=1.1, lambda_H=3.4, mu_L=0.58, mu_H=0.03,
                    tau_L=0.21, tau_H=0.69, tau_P=0.0043)
    r = core_optimal_alpha_L(p, UMTS_COSTS)
    assert r.intermediates["radicand"] < 0
    assert r.no_profitable_attack and r.alpha_L_star == 0.0
    assert r.gamma_star == gamma_c(p, UMTS_COSTS)
    loads = [gamma_c(p.with_attack(a, 0.0), UMTS_COSTS) for a in (0.0, 0.1, 1.0, 10.0)]
    assert loads == sorted(loads, reverse=True)


def test_no_high_bandwidth_traffic_special_case():
    p = ModelParams(lambda_L=1 / 300, lambda_H=0.0, mu_L=0.2, mu_H=1 / 180, tau_P=1 / 300)
    r = core_optimal_alpha_L(p, UMTS_COSTS)
    x, fx = _scan_alpha_L(p, UMTS_COSTS)
    assert r.alpha_L_star == pytest.approx(x, rel=1e-4)
    assert r.gamma_star == pytest.approx(gamma_c(p.with_attack(r.alpha_L_star, 0), UMTS_COSTS), rel=1e-12)


@pytest.mark.parametrize("p", [FIG2, FIG3, FIG5], ids=["fig2", "fig3", "fig5"])
def test_low_bandwidth_optimum_unbounded_without_pch(p):
    r = core_optimal_alpha_L(p, OFF)
    assert r.policy is Policy.LOW_UNBOUNDED and math.isinf(r.alpha_L_star)
    assert r.gamma_star == pytest.approx(gamma_c(p.with_attack(1e9, 0.0), OFF), rel=1e-6)
    assert gamma_c(p.with_attack(1.0, 0.0), OFF) < gamma_c(p.with_attack(100.0, 0.0), OFF)


def test_infinite_paging_timer_behaves_like_pch_disabled():
    p = ModelParams(**{**FIG3.as_dict(), "tau_P": math.inf})
    r = core_optimal_alpha_L(p, UMTS_COSTS)
    assert math.isinf(r.alpha_L_star)
    assert r.gamma_star == pytest.approx(core_optimal_alpha_L(FIG3, OFF).gamma_star)


@pytest.mark.parametrize("A,B", [(-3.0, 1.0), (-0.01, 0.0005), (2.0, -5.0), (0.0, 8.0), (-3.0, 2.0)])
def test_depressed_cubic_roots(A, B):
    roots = depressed_cubic_real_roots(A, B)
    scale = max(1.0, abs(A), abs(B))
    for t in roots:
        assert abs(t ** 3 + A * t + B) < 1e-12 * scale
    n_real = sum(1 for r in np.roots([1, 0, A, B]) if abs(r.imag) < 1e-7)
    assert len(roots) == (3 if n_real == 3 and B * B / 4 + A ** 3 / 27 < 0 else 1)


def test_high_bandwidth_estimate_at_fig2():
    r = core_alpha_H_hat(FIG2, UMTS_COSTS)
    assert r.intermediates["discriminant"] < 0
    a = r.intermediates["a"]
    b = r.intermediates["b"]
    c = r.intermediates["c"]
    x = r.alpha_H_star + FIG2.lambda_H
    assert 2 * a * x ** 3 + b * x ** 2 - c == pytest.approx(0.0, abs=1e-12 * c)
    # lambda_L = 3 lambda_H here, outside the DCH-dominated regime
    assert r.regime_warning


def test_high_bandwidth_estimate_tracks_optimum_when_low_traffic_is_rare():
    rng = np.random.default_rng(11)
    for _ in range(30):
        p = random_params(rng, 1e-3, 1.0, zero_prob=0.0).with_attack(0, 0)
        p = ModelParams(**{**p.as_dict(), "lambda_L": p.lambda_H / 20})
        r = core_alpha_H_hat(p, UMTS_COSTS)
        if r.no_profitable_attack:
            continue
        _, fx = argmax_scan(lambda a: gamma_c(p.with_attack(0.0, a), UMTS_COSTS),
                            1e-6, 1e3, 400, 60, log=True)
        assert r.gamma_star >= 0.999 * fx


@pytest.mark.parametrize("p", [FIG2, FIG4, FIG5], ids=["fig2", "fig4", "fig5"])
def test_high_bandwidth_estimate_without_pch(p):
    r = core_alpha_H_hat(p, OFF)
    x, fx = argmax_scan(lambda a: gamma_c(p.with_attack(0.0, a), OFF), 1e-5, 10, 400, 60, log=True)
    assert gamma_c(p.with_attack(0.0, r.alpha_H_star), OFF) >= 0.9999 * fx
    assert r.gamma_star == pytest.approx(fx, rel=0.01)


def test_regime_warning_when_low_traffic_dominates():
    assert core_alpha_H_hat(FIG3, UMTS_COSTS).regime_warning
    assert not core_alpha_H_hat(FIG5, UMTS_COSTS).regime_warning


@pytest.mark.parametrize("pch", [True, False])
def test_radio_limit_matches_large_low_bursts(pch):
    c = with_pch(UMTS_COSTS, pch)
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = random_params(rng, 1e-3, 1.0, zero_prob=0.0)
        got = radio_limit_load(p, c)
        ref = gamma_r(p.with_attack(1e9, p.alpha_H), c)
        assert got == pytest.approx(ref, rel=1e-6)


def test_radio_limit_as_high_bursts_grow():
    th = theta_quantities(FIG2, UMTS_COSTS)
    assert radio_limit_load(FIG2, UMTS_COSTS, math.inf) == pytest.approx(12 / th.theta_LH)
    assert radio_limit_load(FIG2, UMTS_COSTS, 1e9) == pytest.approx(12 / th.theta_LH, rel=1e-6)
    assert gamma_r(FIG2.with_attack(0.0, 1e9), UMTS_COSTS) == pytest.approx(12 / th.theta_LH, rel=1e-6)


def test_radio_policy_at_fig2():
    r = radio_optimal_bursts(FIG2, UMTS_COSTS)
    assert r.policy is Policy.HIGH_UNBOUNDED
    assert r.gamma_star == max(r.intermediates["high_side"], r.intermediates["low_side"])


def test_optimize_all_ignores_configured_bursts():
    a = optimize_all(FIG3.with_attack(5.0, 5.0), UMTS_COSTS)
    b = optimize_all(FIG3, UMTS_COSTS)
    assert a["core_alpha_L"].alpha_L_star == b["core_alpha_L"].alpha_L_star
    assert set(a) == {"radio", "core_alpha_L", "core_alpha_H_hat"}
