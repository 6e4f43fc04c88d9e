"""Closed-form stationary distribution and signalling loads of the UE chain.

Probabilities are those of the main states in the full chain (signalling
phases included), so that ``sum(pi[s] * w[s]) == 1`` where ``w[s]`` accounts
for the time spent in the signalling phases that leave ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sigstorm.model import MAIN_STATES, ModelParams, SignallingCosts, State, validate_params


@dataclass(frozen=True)
class DerivedQuantities:
    Lambda_L: float
    Lambda_H: float
    Lambda: float
    q_L: float
    rho_L: float
    q_H: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "DerivedQuantities":
        Lambda_L = p.lambda_L + p.alpha_L
        Lambda_H = p.lambda_H + p.alpha_H
        return cls(
            Lambda_L=Lambda_L,
            Lambda_H=Lambda_H,
            Lambda=Lambda_L + Lambda_H,
            q_L=p.lambda_L / (p.lambda_H + p.mu_L),
            rho_L=p.lambda_L / (Lambda_H + p.mu_L),
            q_H=p.lambda_H / p.mu_H,
        )


@dataclass(frozen=True)
class StateWeights:
    """Per-state normalisation weights ``w_s >= 1``.

    ``w_s - 1`` is the expected signalling time incurred per unit of time
    spent in ``s``.  Attack states share the weight of their normal twin.
    """

    D: float
    P: float
    ell: float
    L: float
    h: float

    def __getitem__(self, s: State) -> float:
        if s in (State.ell, State.ell_A):
            return self.ell
        if s in (State.h, State.h_A):
            return self.h
        if s == State.D:
            return self.D
        if s == State.P:
            return self.P
        if s == State.L:
            return self.L
        return 1.0

    def as_dict(self) -> dict[State, float]:
        return {s: self[s] for s in MAIN_STATES}


def state_weights(p: ModelParams, c: SignallingCosts) -> StateWeights:
    dq = DerivedQuantities.from_params(p)
    w_D = 1 + dq.Lambda_H * c.sigma_inv_DH + dq.Lambda_L * c.sigma_inv_DL
    if c.pch_enabled:
        w_P = (1 + dq.Lambda_H * c.sigma_inv_PH + dq.Lambda_L * c.sigma_inv_PL
               + p.tau_P * (c.sigma_inv_PL + c.sigma_inv_release))
        w_ell = 1 + dq.Lambda_H * c.sigma_inv_LH + p.tau_L * c.sigma_inv_LP
    else:
        w_P = 1.0
        w_ell = 1 + dq.Lambda_H * c.sigma_inv_LH + p.tau_L * c.sigma_inv_LD
    w_L = 1 + dq.Lambda_H * c.sigma_inv_LH
    w_h = 1 + p.tau_H * c.sigma_inv_HL
    return StateWeights(D=w_D, P=w_P, ell=w_ell, L=w_L, h=w_h)


@dataclass(frozen=True)
class StationaryDistribution:
    pi: dict[State, float]
    weights: StateWeights
    G: float
    pch_enabled: bool = True

    def __getitem__(self, s: State) -> float:
        return self.pi[s]

    def normalisation(self) -> float:
        return sum(self.pi[s] * self.weights[s] for s in MAIN_STATES)

    def signalling_mass(self) -> float:
        return sum(self.pi[s] * (self.weights[s] - 1.0) for s in MAIN_STATES)


def _check_finite(p: ModelParams, c: SignallingCosts) -> None:
    problems = validate_params(p, c)
    if problems:
        raise ValueError("; ".join(problems))
    if math.isinf(p.alpha_L) or math.isinf(p.alpha_H):
        raise ValueError("infinite burst rate: use the limit formulas in sigstorm.optimizer")
    if c.pch_enabled and math.isinf(p.tau_P):
        raise ValueError("tau_P must be finite when PCH is enabled")


def stationary_distribution(p: ModelParams, c: SignallingCosts) -> StationaryDistribution:
    """Closed-form stationary probabilities of the ten main states.

    The ``q_L / lambda_L`` factors of the closed form are evaluated as
    ``1 / (lambda_H + mu_L)``, which is the same quantity and stays finite
    when ``lambda_L == 0``.  With PCH disabled the P state carries no mass
    and the ``tau_P -> inf`` limits are taken algebraically.
    """
    _check_finite(p, c)
    dq = DerivedQuantities.from_params(p)
    w = state_weights(p, c)
    lam_L, lam_H, mu_L, mu_H = p.lambda_L, p.lambda_H, p.mu_L, p.mu_H
    a_L, a_H, t_L, t_H, t_P = p.alpha_L, p.alpha_H, p.tau_L, p.tau_H, p.tau_P
    Lam, Lam_H = dq.Lambda, dq.Lambda_H
    q_L, rho_L, q_H = dq.q_L, dq.rho_L, dq.q_H
    q_L_over_lam_L = 1.0 / (lam_H + mu_L)

    if c.pch_enabled:
        f_D = t_P * t_L / ((Lam + t_P) * (Lam + t_L))
        f_P = Lam * t_L / ((Lam + t_P) * (Lam + t_L))
        idle_term = t_L / (Lam + t_P) * (t_P * w.D + Lam * w.P)
    else:
        f_D = t_L / (Lam + t_L)
        f_P = 0.0
        idle_term = t_L * w.D

    G_inv = ((1 + rho_L) * (q_H + Lam_H / t_H * ((1 + q_L) * (1 + q_H) + w.h - 1))
             + (idle_term + Lam * w.ell) / (Lam + t_L)
             + rho_L * (w.L + q_L_over_lam_L * (1 + q_H) * a_H))
    G = 1.0 / G_inv

    dch_exit = lam_H * (1 + q_L) + t_H
    fach_exit = Lam_H + lam_L + t_L
    attack_boost = 1 + rho_L * mu_L * q_L_over_lam_L

    pi_H = q_H * (rho_L * q_L_over_lam_L * a_H + (1 + rho_L) * (Lam_H / t_H * (1 + q_L) + 1)) * G
    pi_h = mu_H / dch_exit * pi_H
    pi = {
        State.D: f_D * G,
        State.P: f_P * G,
        State.L: rho_L * G,
        State.H: pi_H,
        State.h: pi_h,
        State.eta: q_L * pi_h,
        State.ell: (mu_L * rho_L * G + mu_H * t_H * pi_H / dch_exit) / fach_exit,
        State.h_A: a_H / dch_exit * attack_boost * G,
        State.eta_A: a_H * q_L / dch_exit * (1 + (lam_H + t_H + lam_L) / (Lam_H + mu_L)) * G,
        State.ell_A: (a_L * t_L / (Lam + t_L) + a_H * t_H * attack_boost / dch_exit) / fach_exit * G,
    }
    return StationaryDistribution(pi=pi, weights=w, G=G, pch_enabled=c.pch_enabled)


def radio_load(d: StationaryDistribution, p: ModelParams, c: SignallingCosts) -> float:
    """RNC signalling rate of one UE, in messages/s."""
    pi = d.pi
    dq = DerivedQuantities.from_params(p)
    fach_idle = pi[State.ell] + pi[State.ell_A]
    g = pi[State.D] * (dq.Lambda_H * c.n_DH + dq.Lambda_L * c.n_DL)
    g += (fach_idle + pi[State.L]) * dq.Lambda_H * c.n_LH
    g += (pi[State.h] + pi[State.h_A]) * p.tau_H * c.n_HL
    if c.pch_enabled:
        g += pi[State.P] * (dq.Lambda_H * c.n_PH + dq.Lambda_L * c.n_PL)
        g += fach_idle * p.tau_L * c.n_LP
        g += pi[State.P] * p.tau_P * c.n_PD
    else:
        g += fach_idle * p.tau_L * c.n_LD
    return g


def core_load(d: StationaryDistribution, p: ModelParams, c: SignallingCosts) -> float:
    """SGSN signalling rate of one UE, in messages/s.

    Only IDLE-adjacent transitions reach the core network.
    """
    pi = d.pi
    dq = DerivedQuantities.from_params(p)
    g = pi[State.D] * (dq.Lambda_H * c.m_DH + dq.Lambda_L * c.m_DL)
    if c.pch_enabled:
        g += pi[State.P] * p.tau_P * c.m_PD
    else:
        g += (pi[State.ell] + pi[State.ell_A]) * p.tau_L * c.m_LD
    return g


OCCUPANCY_FIELDS = ("idle", "pch", "fach_active", "fach_inactive",
                    "dch_active", "dch_inactive", "signalling")


@dataclass(frozen=True)
class Occupancy:
    """Long-run fraction of time spent in each class of states."""

    idle: float
    pch: float
    fach_active: float
    fach_inactive: float
    dch_active: float
    dch_inactive: float
    signalling: float

    @property
    def active(self) -> float:
        return self.fach_active + self.dch_active

    @property
    def inactive(self) -> float:
        """Main-state tail time in FACH/DCH (signalling phases excluded)."""
        return self.fach_inactive + self.dch_inactive

    @property
    def waiting(self) -> float:
        """Tail time plus time spent in signalling phases."""
        return self.inactive + self.signalling

    def total(self) -> float:
        return sum(self.as_dict().values())

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in OCCUPANCY_FIELDS}


def occupancy_fractions(d: StationaryDistribution) -> Occupancy:
    pi = d.pi
    return Occupancy(
        idle=pi[State.D],
        pch=pi[State.P],
        fach_active=pi[State.L],
        fach_inactive=pi[State.ell] + pi[State.ell_A],
        dch_active=pi[State.eta] + pi[State.eta_A] + pi[State.H],
        dch_inactive=pi[State.h] + pi[State.h_A],
        signalling=d.signalling_mass(),
    )


@dataclass(frozen=True)
class LoadReport:
    gamma_r: float
    gamma_c: float
    occupancy: Occupancy


def evaluate_loads(p: ModelParams, c: SignallingCosts) -> LoadReport:
    d = stationary_distribution(p, c)
    return LoadReport(radio_load(d, p, c), core_load(d, p, c), occupancy_fractions(d))


def gamma_c(p: ModelParams, c: SignallingCosts) -> float:
    return core_load(stationary_distribution(p, c), p, c)


def gamma_r(p: ModelParams, c: SignallingCosts) -> float:
    return radio_load(stationary_distribution(p, c), p, c)
