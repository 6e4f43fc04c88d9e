"""Population-level storm load and per-UE anomaly indicators."""

from __future__ import annotations

import math
from dataclasses import dataclass

from sigstorm.analytic import DerivedQuantities, evaluate_loads, stationary_distribution
from sigstorm.model import ModelParams, SignallingCosts, State
from sigstorm.optimizer import core_alpha_H_hat, core_optimal_alpha_L, radio_optimal_bursts

SATURATION_RATE = 1e9
"""Finite stand-in (1/s) for an unbounded burst rate when evaluating loads."""


def finite_rate(alpha: float, cap: float = SATURATION_RATE) -> float:
    return cap if math.isinf(alpha) else alpha


@dataclass(frozen=True)
class StormScenario:
    n_users: int
    fraction_misbehaving: float
    normal_params: ModelParams
    attack_params: ModelParams
    costs: SignallingCosts

    def __post_init__(self):
        if not 0 <= self.fraction_misbehaving <= 1:
            raise ValueError("fraction_misbehaving must lie in [0, 1]")
        if self.n_users < 0:
            raise ValueError("n_users must be >= 0")
        if self.normal_params.alpha_L != 0 or self.normal_params.alpha_H != 0:
            raise ValueError("normal users must have zero burst rates")
        if self.attack_params.with_attack(0.0, 0.0) != self.normal_params:
            raise ValueError("attack_params may differ from normal_params only in the alphas")


def population_load(s: StormScenario) -> tuple[float, float]:
    """Total ``(gamma_r, gamma_c)`` of independent users, in messages/s."""
    normal = evaluate_loads(s.normal_params, s.costs)
    attack_p = s.attack_params.with_attack(finite_rate(s.attack_params.alpha_L),
                                           finite_rate(s.attack_params.alpha_H))
    attack = evaluate_loads(attack_p, s.costs)
    f, n = s.fraction_misbehaving, s.n_users
    return (n * ((1 - f) * normal.gamma_r + f * attack.gamma_r),
            n * ((1 - f) * normal.gamma_c + f * attack.gamma_c))


def worst_case_policies(normal: ModelParams, costs: SignallingCosts) -> dict[str, tuple[float, float]]:
    """Burst rates ``(alpha_L, alpha_H)`` of each worst-case storm policy.

    ``radio`` saturates the RNC; ``core_low`` and ``core_high`` maximise the
    SGSN load with low- and high-bandwidth bursts respectively.  Rates may be
    infinite.
    """
    base = normal.with_attack(0.0, 0.0)
    radio = radio_optimal_bursts(base, costs)
    low = core_optimal_alpha_L(base, costs)
    high = core_alpha_H_hat(base, costs)
    return {
        "radio": (radio.alpha_L_star, radio.alpha_H_star),
        "core_low": (low.alpha_L_star, 0.0),
        "core_high": (0.0, high.alpha_H_star),
    }


def storm_curves(normal: ModelParams, costs: SignallingCosts, n_users: int,
                 fractions, policies: dict[str, tuple[float, float]] | None = None
                 ) -> list[dict[str, float | str]]:
    """Population load for every policy and misbehaving fraction."""
    if policies is None:
        policies = worst_case_policies(normal, costs)
    rows = []
    for name, (a_L, a_H) in policies.items():
        attack = normal.with_attack(a_L, a_H)
        for f in fractions:
            g_r, g_c = population_load(StormScenario(n_users, float(f), normal, attack, costs))
            rows.append({"policy": name, "alpha_L": a_L, "alpha_H": a_H, "fraction": float(f),
                         "gamma_r_total": g_r, "gamma_c_total": g_c})
    return rows


@dataclass(frozen=True)
class DetectionMetrics:
    inactive_fraction: float
    active_fraction: float
    promotion_rate: float


def detection_metrics(p: ModelParams, c: SignallingCosts) -> DetectionMetrics:
    """Tail time, data-carrying time and connection-attempt rate of one UE.

    ``promotion_rate`` is the rate of leaving IDLE or PCH, every such move
    passing through FACH or DCH.
    """
    d = stationary_distribution(p, c)
    occ = evaluate_loads(p, c).occupancy
    lam = DerivedQuantities.from_params(p).Lambda
    rate = d.pi[State.D] * lam
    if c.pch_enabled:
        rate += d.pi[State.P] * (lam + p.tau_P)
    return DetectionMetrics(occ.inactive, occ.active, rate)
