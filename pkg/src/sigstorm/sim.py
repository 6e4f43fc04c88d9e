"""Seeded discrete-event simulation of the full chain.

Every sojourn, including the inactivity timers and each signalling phase,
is exponential.  In a main state the next transition is the winner of a race
between competing exponentials, drawn as one exponential at the total rate
plus a proportional choice.  Message counters are charged when a transition
fires, i.e. on entry to its first signalling segment.

Randomness comes from numpy's PCG64 (128-bit state); replication ``r`` of
seed ``s`` uses ``SeedSequence(s, spawn_key=(r,))`` so every replication is an
independent, reproducible stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import stats

from sigstorm.analytic import OCCUPANCY_FIELDS
from sigstorm.model import State, TransitionTable

_CHUNK = 1 << 18

_CLASS_OF_STATE = {
    State.D: 0, State.P: 1, State.L: 2, State.ell: 3, State.ell_A: 3,
    State.eta: 4, State.eta_A: 4, State.H: 4, State.h: 5, State.h_A: 5,
}
_SIGNALLING_CLASS = 6


@dataclass
class _Compiled:
    start: np.ndarray
    target: np.ndarray
    cumprob: np.ndarray
    n_cost: np.ndarray
    m_cost: np.ndarray
    total_rate: np.ndarray
    occ_class: np.ndarray
    n_main: int


def _compile(t: TransitionTable) -> _Compiled:
    main = list(t.states)
    pos = {s: i for i, s in enumerate(main)}
    outs: list[list[tuple[int, float, float, float]]] = [[] for _ in main]
    occ = [_CLASS_OF_STATE[s] for s in main]

    for e in t.edges:
        if not e.rate > 0:
            continue
        src, rate, n, m = pos[e.source], e.rate, e.n_cost, e.m_cost
        for delay in e.segments:
            idx = len(outs)
            outs.append([])
            occ.append(_SIGNALLING_CLASS)
            outs[src].append((idx, rate, n, m))
            src, rate, n, m = idx, 1.0 / delay, 0.0, 0.0
        outs[src].append((pos[e.target], rate, n, m))

    start = np.zeros(len(outs) + 1, dtype=np.int64)
    target, cum, ncost, mcost = [], [], [], []
    total = np.zeros(len(outs))
    for i, lst in enumerate(outs):
        tot = sum(r for _, r, _, _ in lst)
        total[i] = tot
        acc = 0.0
        for j, (dst, r, n, m) in enumerate(lst):
            acc += r
            target.append(dst)
            cum.append(1.0 if j == len(lst) - 1 else acc / tot)
            ncost.append(n)
            mcost.append(m)
        start[i + 1] = start[i] + len(lst)
    return _Compiled(start, np.array(target, dtype=np.int64), np.array(cum),
                     np.array(ncost), np.array(mcost), total,
                     np.array(occ, dtype=np.int64), len(main))


@njit(cache=True)
def _advance(state, clock, horizon, u, start, target, cumprob, ncost, mcost,
             total_rate, time_in, counters):
    """Consume pairs of uniforms from ``u`` until the horizon or the chunk ends."""
    k = 0
    n_u = u.shape[0]
    while k + 1 < n_u:
        rate = total_rate[state]
        if rate <= 0.0:
            time_in[state] += horizon - clock
            return state, horizon, True
        dwell = -np.log(1.0 - u[k]) / rate
        if clock + dwell >= horizon:
            time_in[state] += horizon - clock
            return state, horizon, True
        time_in[state] += dwell
        clock += dwell
        x = u[k + 1]
        j = start[state]
        last = start[state + 1] - 1
        while j < last and x >= cumprob[j]:
            j += 1
        counters[0] += ncost[j]
        counters[1] += mcost[j]
        counters[2] += 1.0
        state = target[j]
        k += 2
    return state, clock, False


def _run_one(comp: _Compiled, seed: int, rep: int, horizon: float, start_state: int):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep,))))
    time_in = np.zeros(len(comp.total_rate))
    counters = np.zeros(3)
    state, clock, done = start_state, 0.0, False
    while not done:
        u = rng.random(_CHUNK)
        state, clock, done = _advance(state, clock, horizon, u, comp.start, comp.target,
                                      comp.cumprob, comp.n_cost, comp.m_cost,
                                      comp.total_rate, time_in, counters)
    return time_in, counters


METRICS = ("gamma_r", "gamma_c") + OCCUPANCY_FIELDS


@dataclass
class SimulationStats:
    """Per-replication raw output of :func:`simulate`.

    ``time_in_state`` maps each main state to seconds per replication;
    ``signalling_time`` holds the time spent in signalling phases.
    """

    horizon: float
    time_in_state: dict[State, np.ndarray]
    signalling_time: np.ndarray
    n_messages: np.ndarray
    m_messages: np.ndarray
    transitions: np.ndarray
    seed: int = 0
    replication_ids: tuple[int, ...] = field(default_factory=tuple)

    @property
    def replications(self) -> int:
        return len(self.n_messages)

    def per_replication(self) -> dict[str, np.ndarray]:
        T = self.horizon
        t = self.time_in_state
        return {
            "gamma_r": self.n_messages / T,
            "gamma_c": self.m_messages / T,
            "idle": t[State.D] / T,
            "pch": t[State.P] / T,
            "fach_active": t[State.L] / T,
            "fach_inactive": (t[State.ell] + t[State.ell_A]) / T,
            "dch_active": (t[State.eta] + t[State.eta_A] + t[State.H]) / T,
            "dch_inactive": (t[State.h] + t[State.h_A]) / T,
            "signalling": self.signalling_time / T,
        }

    def pi_estimates(self) -> dict[State, np.ndarray]:
        return {s: v / self.horizon for s, v in self.time_in_state.items()}

    def merge(self, other: "SimulationStats") -> "SimulationStats":
        if other.horizon != self.horizon:
            raise ValueError("cannot merge runs with different horizons")
        return SimulationStats(
            horizon=self.horizon,
            time_in_state={s: np.concatenate([self.time_in_state[s], other.time_in_state[s]])
                           for s in State},
            signalling_time=np.concatenate([self.signalling_time, other.signalling_time]),
            n_messages=np.concatenate([self.n_messages, other.n_messages]),
            m_messages=np.concatenate([self.m_messages, other.m_messages]),
            transitions=np.concatenate([self.transitions, other.transitions]),
            seed=self.seed,
            replication_ids=self.replication_ids + other.replication_ids,
        )


def _take(s: SimulationStats, idx: np.ndarray) -> SimulationStats:
    return SimulationStats(
        horizon=s.horizon,
        time_in_state={k: v[idx] for k, v in s.time_in_state.items()},
        signalling_time=s.signalling_time[idx],
        n_messages=s.n_messages[idx],
        m_messages=s.m_messages[idx],
        transitions=s.transitions[idx],
        seed=s.seed,
        replication_ids=tuple(s.replication_ids[i] for i in idx),
    )


def sort_replications(s: SimulationStats) -> SimulationStats:
    """Reorder runs by replication id, e.g. after merging worker batches."""
    return _take(s, np.argsort(s.replication_ids, kind="stable"))


def simulate(t: TransitionTable, seed: int, horizon: float, replications: int = 1,
             replication_ids: list[int] | None = None) -> SimulationStats:
    """Simulate ``replications`` independent runs of length ``horizon`` from IDLE.

    ``replication_ids`` overrides the stream index of each run (repeating an
    id repeats the run exactly).
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    for e in t.edges:
        if not np.isfinite(e.rate):
            raise ValueError("simulation needs finite rates")
    ids = list(range(replications)) if replication_ids is None else list(replication_ids)
    comp = _compile(t)
    start_state = list(t.states).index(State.D)

    times, counts = [], []
    for rep in ids:
        ti, c = _run_one(comp, seed, rep, horizon, start_state)
        times.append(ti)
        counts.append(c)
    times_a = np.array(times)
    counts_a = np.array(counts)

    per_state = {s: np.zeros(len(ids)) for s in State}
    for i, s in enumerate(t.states):
        per_state[s] = times_a[:, i]
    return SimulationStats(
        horizon=horizon,
        time_in_state=per_state,
        signalling_time=times_a[:, comp.n_main:].sum(axis=1),
        n_messages=counts_a[:, 0],
        m_messages=counts_a[:, 1],
        transitions=counts_a[:, 2],
        seed=seed,
        replication_ids=tuple(ids),
    )


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    rel_half_width: float
    imprecise: bool


def confidence(s: SimulationStats, level: float = 0.95, max_rel_half_width: float = 0.05
               ) -> dict[str, Estimate]:
    """Across-replication mean and standard error of every metric.

    Metrics whose ``level`` confidence half-width exceeds ``max_rel_half_width``
    of the mean are flagged ``imprecise``.
    """
    n = s.replications
    if n < 2:
        raise ValueError("confidence needs at least 2 replications")
    q = stats.t.ppf(0.5 + level / 2, n - 1)
    out = {}
    for name, x in s.per_replication().items():
        mean = float(np.mean(x))
        se = float(np.std(x, ddof=1) / np.sqrt(n))
        rhw = q * se / abs(mean) if mean != 0 else (0.0 if se == 0 else np.inf)
        out[name] = Estimate(mean, se, float(rhw), bool(rhw > max_rel_half_width))
    return out
