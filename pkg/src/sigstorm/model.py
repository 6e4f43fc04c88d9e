"""Parameters, signalling costs and the transition structure of the single-UE chain.

The chain has ten "main" states. Seven are reached during or after normal
traffic (IDLE ``D``, PCH ``P``, FACH inactive ``ell``, FACH active ``L``,
DCH inactive ``h``, DCH low-bandwidth ``eta``, DCH high-bandwidth ``H``) and
three are forced by malicious or misbehaving bursts (``ell_A``, ``h_A``,
``eta_A``).  Every promotion/demotion additionally passes through one or more
timed signalling segments whose mean durations come from :class:`SignallingCosts`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Iterator

INFINITE = math.inf
"""Symbolic value for an unbounded burst rate (limit analyses only)."""


class State(str, Enum):
    D = "D"
    P = "P"
    ell = "ell"
    L = "L"
    h = "h"
    eta = "eta"
    H = "H"
    ell_A = "ell_A"
    h_A = "h_A"
    eta_A = "eta_A"

    def __str__(self) -> str:
        return self.value


NORMAL_STATES = (State.D, State.P, State.ell, State.L, State.h, State.eta, State.H)
ATTACK_STATES = (State.ell_A, State.h_A, State.eta_A)
MAIN_STATES = NORMAL_STATES + ATTACK_STATES

RATE_KEYS = (
    "lambda_L", "lambda_H", "mu_L", "mu_H",
    "alpha_L", "alpha_H", "tau_L", "tau_H", "tau_P",
)


@dataclass(frozen=True)
class ModelParams:
    """Behavioural rates of one UE, all in 1/s.

    ``alpha_L``/``alpha_H`` may be :data:`INFINITE` for limit analyses; any
    routine that evaluates the chain numerically rejects that.
    """

    lambda_L: float
    lambda_H: float
    mu_L: float
    mu_H: float
    alpha_L: float = 0.0
    alpha_H: float = 0.0
    tau_L: float = 0.2
    tau_H: float = 0.2
    tau_P: float = 1.0 / 300.0

    def with_attack(self, alpha_L: float = 0.0, alpha_H: float = 0.0) -> "ModelParams":
        return replace(self, alpha_L=alpha_L, alpha_H=alpha_H)

    def scaled(self, factor: float) -> "ModelParams":
        """All rates multiplied by ``factor`` (a change of time unit)."""
        return ModelParams(**{k: getattr(self, k) * factor for k in RATE_KEYS})

    @property
    def has_infinite_rate(self) -> bool:
        return any(math.isinf(getattr(self, k)) for k in RATE_KEYS)

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in RATE_KEYS}


# Transition codes carried by SignallingCosts.  "PD" is the composite
# PCH -> (FACH) -> IDLE release; "LD" is the direct FACH -> IDLE demotion used
# only when PCH is disabled.
TRANSITIONS = ("DL", "PL", "DH", "PH", "LH", "HL", "LP", "PD", "LD")
CORE_TRANSITIONS = ("DL", "DH", "PD", "LD")
"""Transitions into or out of IDLE, the only ones that reach the core network."""
PCH_ONLY = ("PL", "PH", "LP", "PD")

_TRANSITION_NAMES = {
    "DL": "D→L", "PL": "P→L", "DH": "D→H", "PH": "P→H", "LH": "L→H",
    "HL": "H→L", "LP": "L→P", "PD": "P→D", "LD": "L→D",
}


@dataclass(frozen=True)
class SignallingCosts:
    """Per-transition RNC message counts ``n_XY``, RNC<->SGSN counts ``m_XY``
    and mean signalling delays ``sigma_inv_XY`` (seconds).

    Defaults are the network parameters of the UMTS model.  ``sigma_inv_PD``
    is the total delay of the composite PCH -> FACH -> IDLE release; the
    model charges it as two segments, ``sigma_inv_PL`` followed by the
    remainder :attr:`sigma_inv_release`.
    """

    n_DL: float = 15
    m_DL: float = 5
    sigma_inv_DL: float = 0.75
    n_PL: float = 3
    m_PL: float = 0
    sigma_inv_PL: float = 0.15
    n_DH: float = 20
    m_DH: float = 5
    sigma_inv_DH: float = 1.0
    n_PH: float = 10
    m_PH: float = 0
    sigma_inv_PH: float = 0.5
    n_LH: float = 7
    m_LH: float = 0
    sigma_inv_LH: float = 0.35
    n_HL: float = 5
    m_HL: float = 0
    sigma_inv_HL: float = 0.25
    n_LP: float = 2
    m_LP: float = 0
    sigma_inv_LP: float = 0.1
    n_PD: float = 6
    m_PD: float = 2
    sigma_inv_PD: float = 0.3
    # FACH -> IDLE without PCH: no measured row exists, so the release row is
    # reused (0.05 s per message).
    n_LD: float = 6
    m_LD: float = 2
    sigma_inv_LD: float = 0.3
    pch_enabled: bool = True

    def n(self, code: str) -> float:
        return getattr(self, f"n_{code}")

    def m(self, code: str) -> float:
        return getattr(self, f"m_{code}")

    def sigma_inv(self, code: str) -> float:
        return getattr(self, f"sigma_inv_{code}")

    @property
    def sigma_inv_release(self) -> float:
        """Second segment (FACH -> IDLE release) of the composite P -> D path."""
        return self.sigma_inv_PD - self.sigma_inv_PL

    def scaled_delays(self, factor: float) -> "SignallingCosts":
        return replace(self, **{f"sigma_inv_{c}": self.sigma_inv(c) * factor for c in TRANSITIONS})

    def scaled_counts(self, factor: float) -> "SignallingCosts":
        upd = {}
        for c in TRANSITIONS:
            upd[f"n_{c}"] = self.n(c) * factor
            upd[f"m_{c}"] = self.m(c) * factor
        return replace(self, **upd)

    def as_dict(self) -> dict[str, float | bool]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


COST_KEYS = tuple(f.name for f in fields(SignallingCosts) if f.name != "pch_enabled")

UMTS_COSTS = SignallingCosts()


def pch_disabled_projection(costs: SignallingCosts, *, n_LD: float | None = None,
                            m_LD: float | None = None,
                            sigma_inv_LD: float | None = None) -> SignallingCosts:
    """Return ``costs`` for a network that does not use the PCH state.

    FACH demotes straight to IDLE, charged with ``n_LD``/``m_LD``/``sigma_inv_LD``
    (the configured values unless overridden here).  The P-only entries are
    left in place but are never read on the PCH-disabled path.
    """
    if not costs.pch_enabled:
        raise ValueError("PCH already disabled")
    upd: dict[str, float | bool] = {"pch_enabled": False}
    if n_LD is not None:
        upd["n_LD"] = n_LD
    if m_LD is not None:
        upd["m_LD"] = m_LD
    if sigma_inv_LD is not None:
        upd["sigma_inv_LD"] = sigma_inv_LD
    return replace(costs, **upd)


def with_pch(costs: SignallingCosts, enabled: bool) -> SignallingCosts:
    if costs.pch_enabled == enabled:
        return costs
    return replace(costs, pch_enabled=enabled)


def validate_params(p: ModelParams, c: SignallingCosts) -> list[str]:
    """Every violated invariant of ``p`` and ``c`` as a human readable line."""
    problems = []
    rates = {}
    for k in RATE_KEYS:
        try:
            v = float(getattr(p, k))
        except (TypeError, ValueError):
            problems.append(f"{k} must be a number")
            continue
        if math.isnan(v):
            problems.append(f"{k} must be a number")
        elif v < 0:
            problems.append(f"{k} must be >= 0")
        else:
            rates[k] = v
    for k in ("mu_L", "mu_H", "tau_L", "tau_H"):
        if rates.get(k) == 0:
            problems.append(f"{k} must be > 0")
        elif math.isinf(rates.get(k, 0)):
            problems.append(f"{k} must be finite")
    for k in ("lambda_L", "lambda_H"):
        if math.isinf(rates.get(k, 0)):
            problems.append(f"{k} must be finite")
    if c.pch_enabled and rates.get("tau_P") == 0:
        problems.append("tau_P must be > 0 when PCH is enabled")

    if c.pch_enabled:
        active = [t for t in TRANSITIONS if t != "LD"]
    else:
        active = [t for t in TRANSITIONS if t not in PCH_ONLY]
    for t in TRANSITIONS:
        n, m, s = c.n(t), c.m(t), c.sigma_inv(t)
        if n < 0 or m < 0:
            problems.append(f"message counts must be >= 0 for {_TRANSITION_NAMES[t]}")
        if m > n:
            problems.append(f"m_XY ≤ n_XY violated for {_TRANSITION_NAMES[t]}")
        if t not in CORE_TRANSITIONS and m != 0:
            problems.append(f"m_{t} must be 0: {_TRANSITION_NAMES[t]} does not touch IDLE")
        if t in active and not s > 0:
            problems.append(f"sigma_inv_{t} must be > 0")
    if c.pch_enabled and not c.sigma_inv_release > 0:
        problems.append("sigma_inv_PD must exceed sigma_inv_PL (composite release segment)")
    return problems


@dataclass(frozen=True)
class Edge:
    """One transition of the reduced chain.

    ``segments`` lists the mean delays of the signalling phases traversed,
    in order; an empty tuple means the move is instantaneous and free.
    """

    source: State
    rate: float
    target: State
    segments: tuple[float, ...] = ()
    n_cost: float = 0.0
    m_cost: float = 0.0
    label: str = ""


@dataclass(frozen=True)
class TransitionTable:
    edges: tuple[Edge, ...]
    states: tuple[State, ...]
    pch_enabled: bool = True
    params: ModelParams | None = field(default=None, compare=False)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def out_edges(self, s: State) -> list[Edge]:
        return [e for e in self.edges if e.source == s]

    def exit_rate(self, s: State) -> float:
        return sum(e.rate for e in self.edges if e.source == s)

    def n_segments(self) -> int:
        return sum(len(e.segments) for e in self.edges)


def build_transition_table(p: ModelParams, c: SignallingCosts) -> TransitionTable:
    """Materialise the reduced chain's edge list.

    Zero-rate edges are omitted.  Bursts that target the band the UE already
    occupies are no-ops and have no edge.
    """
    problems = validate_params(p, c)
    if problems:
        raise ValueError("; ".join(problems))
    if math.isinf(p.alpha_L) or math.isinf(p.alpha_H):
        raise ValueError("infinite burst rates cannot be materialised; use a large finite rate")
    if c.pch_enabled and math.isinf(p.tau_P):
        raise ValueError("tau_P must be finite when PCH is enabled")

    S = State
    lL, lH, aL, aH = p.lambda_L, p.lambda_H, p.alpha_L, p.alpha_H
    raw: list[Edge] = []

    def add(src, rate, dst, code=None, segs=None, m=True):
        if code is None:
            raw.append(Edge(src, rate, dst, (), 0.0, 0.0, f"{src}->{dst}"))
            return
        delays = tuple(segs) if segs is not None else (c.sigma_inv(code),)
        raw.append(Edge(src, rate, dst, delays, c.n(code), c.m(code) if m else 0.0,
                        f"{src}->{dst}"))

    add(S.D, lL, S.L, "DL")
    add(S.D, aL, S.ell_A, "DL")
    add(S.D, lH, S.H, "DH")
    add(S.D, aH, S.h_A, "DH")
    if c.pch_enabled:
        add(S.P, lL, S.L, "PL")
        add(S.P, aL, S.ell_A, "PL")
        add(S.P, lH, S.H, "PH")
        add(S.P, aH, S.h_A, "PH")
        add(S.P, p.tau_P, S.D, "PD", segs=(c.sigma_inv_PL, c.sigma_inv_release))
    for fach in (S.ell, S.ell_A):
        add(fach, lL, S.L)
        add(fach, lH, S.H, "LH")
        add(fach, aH, S.h_A, "LH")
        if c.pch_enabled:
            add(fach, p.tau_L, S.P, "LP")
        else:
            add(fach, p.tau_L, S.D, "LD")
    add(S.L, lH, S.H, "LH")
    add(S.L, aH, S.eta_A, "LH")
    add(S.L, p.mu_L, S.ell)
    add(S.h, lL, S.eta)
    add(S.h, lH, S.H)
    add(S.h, p.tau_H, S.ell, "HL")
    add(S.h_A, lL, S.eta_A)
    add(S.h_A, lH, S.H)
    add(S.h_A, p.tau_H, S.ell_A, "HL")
    add(S.eta, lH, S.H)
    add(S.eta, p.mu_L, S.h)
    add(S.eta_A, lH, S.H)
    add(S.eta_A, p.mu_L, S.h_A)
    add(S.H, p.mu_H, S.h)

    states = MAIN_STATES if c.pch_enabled else tuple(s for s in MAIN_STATES if s != S.P)
    edges = tuple(e for e in raw if e.rate > 0)
    return TransitionTable(edges, states, c.pch_enabled, p)


def reachable_states(table: TransitionTable, start: State = State.D) -> set[State]:
    seen = {start}
    frontier = [start]
    while frontier:
        s = frontier.pop()
        for e in table.out_edges(s):
            if e.target not in seen:
                seen.add(e.target)
                frontier.append(e.target)
    return seen
