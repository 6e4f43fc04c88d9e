"""Worst-case burst rates against the RNC and the SGSN.

Closed forms for the radio-side saturation load and policy, the core-side
optimal low-bandwidth burst rate, and the DCH-only approximation of the
core-side optimal high-bandwidth rate (a cubic solved by Cardano's method).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from sigstorm.analytic import DerivedQuantities, gamma_c
from sigstorm.model import INFINITE, ModelParams, SignallingCosts


class Policy(str, Enum):
    LOW_UNBOUNDED = "(inf,0)"
    HIGH_UNBOUNDED = "(0,inf)"
    FINITE = "finite"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ThetaQuantities:
    """Mean cycle lengths (s) of the repeated promotion/demotion loops."""

    theta_LH: float
    theta_PL: float
    theta_DL: float
    theta_PLH: float
    theta_DLH: float


def theta_quantities(p: ModelParams, c: SignallingCosts) -> ThetaQuantities:
    dq = DerivedQuantities.from_params(p)
    busy = (1 + dq.q_L) * (1 + dq.q_H)

    def theta(up: float, tau: float, down: float) -> float:
        return up + busy / tau + down

    theta_LH = theta(c.sigma_inv_LH, p.tau_H, c.sigma_inv_HL)
    theta_PL = theta(c.sigma_inv_PL, p.tau_L, c.sigma_inv_LP)
    theta_DL = theta(c.sigma_inv_DL, p.tau_L, c.sigma_inv_LD)
    detour = (1 + dq.q_L) / p.tau_L * p.lambda_H * theta_LH
    return ThetaQuantities(theta_LH, theta_PL, theta_DL, theta_PL + detour, theta_DL + detour)


@dataclass(frozen=True)
class OptimizerResult:
    policy: Policy
    alpha_L_star: float
    alpha_H_star: float
    gamma_star: float
    alpha_H_hat: float | None = None
    intermediates: dict[str, float] = field(default_factory=dict)
    no_profitable_attack: bool = False
    regime_warning: bool = False


def radio_limit_load(p: ModelParams, c: SignallingCosts, alpha_H: float | None = None) -> float:
    """RNC load as ``alpha_L -> inf``, as a function of ``alpha_H``.

    With PCH disabled the same expression is used with IDLE in place of PCH
    (the FACH <-> IDLE loop replaces FACH <-> PCH).
    """
    a_H = p.alpha_H if alpha_H is None else alpha_H
    th = theta_quantities(p, c)
    Lam_H = p.lambda_H + a_H
    if c.pch_enabled:
        low, theta_low = c.n_PL + c.n_LP, th.theta_PL
    else:
        low, theta_low = c.n_DL + c.n_LD, th.theta_DL
    high = c.n_LH + c.n_HL
    if math.isinf(Lam_H):
        return high / th.theta_LH
    if Lam_H == 0:
        return low / theta_low
    # ratio of expected FACH->DCH cycles to FACH->PCH cycles per unit time
    k = p.tau_L * (Lam_H + p.mu_L) / (Lam_H * (Lam_H + p.lambda_L + p.mu_L))
    return high / (th.theta_LH + k * theta_low) + low / (theta_low + th.theta_LH / k)


def radio_optimal_bursts(p: ModelParams, c: SignallingCosts) -> OptimizerResult:
    th = theta_quantities(p, c)
    high = (c.n_LH + c.n_HL) / th.theta_LH
    if c.pch_enabled:
        low = (c.n_PL + c.n_LP) / th.theta_PL
    else:
        low = (c.n_DL + c.n_LD) / th.theta_DL
    inter = {"high_side": high, "low_side": low,
             "theta_LH": th.theta_LH, "theta_PL": th.theta_PL, "theta_DL": th.theta_DL}
    if high <= low:
        return OptimizerResult(Policy.LOW_UNBOUNDED, INFINITE, 0.0, low, intermediates=inter)
    return OptimizerResult(Policy.HIGH_UNBOUNDED, 0.0, INFINITE, high, intermediates=inter)


def core_optimal_alpha_L(p: ModelParams, c: SignallingCosts) -> OptimizerResult:
    """Low-bandwidth burst rate maximising the SGSN load (``alpha_H* = 0``).

    Without PCH (or with an instantaneous PCH timer) the optimum is unbounded.
    """
    th = theta_quantities(p, c)
    lam_L, lam_H = p.lambda_L, p.lambda_H

    if not c.pch_enabled or math.isinf(p.tau_P):
        gamma = (c.m_DL + c.m_LD) / th.theta_DLH
        return OptimizerResult(Policy.LOW_UNBOUNDED, INFINITE, 0.0, gamma,
                               intermediates={"theta_DLH": th.theta_DLH})

    t_P = p.tau_P
    if lam_H == 0:
        busy = 1 + lam_L / p.mu_L
        root = math.sqrt(t_P * busy / th.theta_PL) - lam_L
        alpha = max(root, 0.0)
        Lam_L = alpha + lam_L
        denom = (c.sigma_inv_DL + c.sigma_inv_LP + c.sigma_inv_PL + c.sigma_inv_release
                 + busy * (1 / p.tau_L + 1 / t_P + (2 / Lam_L if Lam_L > 0 else INFINITE)))
        gamma = (c.m_DL + c.m_PD) / denom
        return OptimizerResult(Policy.FINITE, alpha, 0.0, gamma,
                               intermediates={"theta_PL": th.theta_PL, "root": root},
                               no_profitable_attack=root <= 0)

    dq = DerivedQuantities.from_params(p)
    s_rel = c.sigma_inv_release
    tPLH, tLH = th.theta_PLH, th.theta_LH
    busy = (1 + dq.q_L) * (1 + dq.q_H + lam_H * tLH)
    a = (lam_H * (2 * tPLH + c.sigma_inv_DH - c.sigma_inv_PL - c.sigma_inv_LH)
         + t_P * (tPLH + c.sigma_inv_DL + s_rel) + busy)
    b = (lam_H ** 2 * (tPLH + c.sigma_inv_PH - c.sigma_inv_PL - c.sigma_inv_LH)
         + lam_H * t_P * (tPLH + c.sigma_inv_DH + s_rel - c.sigma_inv_LH)
         + (lam_H + t_P) * busy)
    cc = lam_H * (c.m_DH + c.m_PD) / (c.m_DL + c.m_PD)
    radicand = cc * cc + (b - cc * a) / tPLH
    # no stationary point: the load only falls as bursts are added
    root = math.sqrt(radicand) - cc - lam_L if radicand >= 0 else -math.inf
    alpha = max(root, 0.0)
    gamma = gamma_c(p.with_attack(alpha, 0.0), c)
    return OptimizerResult(Policy.FINITE, alpha, 0.0, gamma,
                           intermediates={"a": a, "b": b, "c": cc, "theta_PLH": tPLH,
                                          "radicand": radicand, "root": root},
                           no_profitable_attack=root <= 0)


def depressed_cubic_real_roots(A: float, B: float) -> list[float]:
    """Real roots of ``t**3 + A*t + B = 0``.

    Cardano's formula with sign-preserving real cube roots when the
    discriminant ``B**2/4 + A**3/27`` is non-negative, otherwise the
    trigonometric form of the three real roots.
    """
    disc = B * B / 4 + A ** 3 / 27
    if disc >= 0:
        r = math.sqrt(disc)
        return [_cbrt(-B / 2 + r) + _cbrt(-B / 2 - r)]
    m = 2 * math.sqrt(-A / 3)
    phi = math.acos(max(-1.0, min(1.0, 3 * B / (A * m))))
    return [m * math.cos((phi - 2 * math.pi * k) / 3) for k in range(3)]


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1 / 3), x)


def core_alpha_H_hat(p: ModelParams, c: SignallingCosts) -> OptimizerResult:
    """High-bandwidth burst rate maximising the SGSN load when DCH dominates.

    Assumes traffic is mostly high-bandwidth; ``regime_warning`` is set when
    ``lambda_L > lambda_H``.  With PCH disabled the optimum has a square-root
    form and the resulting load a closed form; otherwise the positive root of
    ``2a x**3 + b x**2 - c = 0`` (``x = Lambda_H``) is taken and the load is
    evaluated from the stationary distribution.
    """
    lam_H = p.lambda_H
    busy = 1 + lam_H / p.mu_H
    warn = p.lambda_L > lam_H
    a = c.sigma_inv_LH + busy / p.tau_H + c.sigma_inv_HL

    if not c.pch_enabled:
        root = math.sqrt(p.tau_L * busy / a) - lam_H
        alpha = max(root, 0.0)
        Lam_H = alpha + lam_H
        denom = (c.sigma_inv_DH + c.sigma_inv_HL + c.sigma_inv_LD
                 + busy * (1 / p.tau_H + 1 / p.tau_L + (2 / Lam_H if Lam_H > 0 else INFINITE)))
        gamma = (c.m_DH + c.m_LD) / denom
        return OptimizerResult(Policy.FINITE, 0.0, alpha, gamma, alpha_H_hat=alpha,
                               intermediates={"a": a, "root": root},
                               no_profitable_attack=root <= 0, regime_warning=warn)

    t_L, t_P = p.tau_L, p.tau_P
    b = t_L * (c.sigma_inv_PH + busy * (1 / p.tau_H + 1 / t_L) + c.sigma_inv_HL + c.sigma_inv_LP) + t_P * a
    cc = t_L * t_P * busy
    A = -b * b / (12 * a * a)
    B = b ** 3 / (108 * a ** 3) - cc / (2 * a)
    shift = b / (6 * a) + lam_H
    roots = [t - shift for t in depressed_cubic_real_roots(A, B)]
    if len(roots) == 1:
        root = roots[0]
    else:
        root = max(roots, key=lambda r: gamma_c(p.with_attack(0.0, max(r, 0.0)), c))
    alpha = max(root, 0.0)
    gamma = gamma_c(p.with_attack(0.0, alpha), c)
    inter = {"a": a, "b": b, "c": cc, "A": A, "B": B,
             "discriminant": B * B / 4 + A ** 3 / 27, "root": root}
    return OptimizerResult(Policy.FINITE, 0.0, alpha, gamma, alpha_H_hat=alpha,
                           intermediates=inter, no_profitable_attack=root <= 0,
                           regime_warning=warn)


def optimize_all(p: ModelParams, c: SignallingCosts) -> dict[str, OptimizerResult]:
    """Every worst-case result for the normal traffic in ``p`` (its alphas are ignored)."""
    base = p.with_attack(0.0, 0.0)
    return {
        "radio": radio_optimal_bursts(base, c),
        "core_alpha_L": core_optimal_alpha_L(base, c),
        "core_alpha_H_hat": core_alpha_H_hat(base, c),
    }
