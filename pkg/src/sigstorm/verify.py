"""Cross-checks of the closed forms against the numeric oracle and the simulator."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from sigstorm.analytic import evaluate_loads, stationary_distribution
from sigstorm.model import (CORE_TRANSITIONS, MAIN_STATES, ModelParams, SignallingCosts, State, UMTS_COSTS,
                            build_transition_table)
from sigstorm.oracle import oracle_solve
from sigstorm.sim import confidence, simulate


def random_params(rng: np.random.Generator, lo: float = 1e-4, hi: float = 10.0,
                  zero_prob: float = 0.1) -> ModelParams:
    """Log-uniform rates; each optional rate is zero with probability ``zero_prob``."""
    v = np.exp(rng.uniform(np.log(lo), np.log(hi), 9))
    zeros = rng.random(4) < zero_prob
    for i in np.flatnonzero(zeros):
        v[[0, 1, 4, 5][i]] = 0.0
    return ModelParams(*map(float, v))


def random_costs(rng: np.random.Generator, pch_enabled: bool = True) -> SignallingCosts:
    """Integer message counts with ``m <= n`` and positive log-uniform delays.

    Core counts are zero except on IDLE-adjacent transitions.
    """
    upd: dict = {"pch_enabled": pch_enabled}
    for code in ("DL", "PL", "DH", "PH", "LH", "HL", "LP", "PD", "LD"):
        n = int(rng.integers(0, 30))
        upd[f"n_{code}"] = float(n)
        upd[f"m_{code}"] = float(rng.integers(0, n + 1)) if code in CORE_TRANSITIONS else 0.0
        upd[f"sigma_inv_{code}"] = float(np.exp(rng.uniform(np.log(0.01), np.log(2.0))))
    upd["sigma_inv_PD"] = upd["sigma_inv_PL"] + float(np.exp(rng.uniform(np.log(0.01), np.log(2.0))))
    return replace(UMTS_COSTS, **upd)


def rel_err(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


@dataclass(frozen=True)
class OracleComparison:
    pi: float
    gamma_r: float
    gamma_c: float
    signalling: float

    def worst(self) -> float:
        return max(self.pi, self.gamma_r, self.gamma_c, self.signalling)


def compare_with_oracle(p: ModelParams, c: SignallingCosts) -> OracleComparison:
    """Largest relative discrepancy of each closed-form output."""
    d = stationary_distribution(p, c)
    rep = evaluate_loads(p, c)
    red, g_r, g_c = oracle_solve(build_transition_table(p, c))
    states = MAIN_STATES if c.pch_enabled else tuple(s for s in MAIN_STATES if s is not State.P)
    return OracleComparison(
        pi=max(rel_err(d.pi[s], red.pi[s]) for s in states),
        gamma_r=rel_err(rep.gamma_r, g_r),
        gamma_c=rel_err(rep.gamma_c, g_c),
        signalling=rel_err(d.signalling_mass(), sum(red.signalling_mass.values())),
    )


def _one_random(args: tuple[int, int, bool]) -> tuple[ModelParams, SignallingCosts, OracleComparison]:
    seed, index, randomise_costs = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    p = random_params(rng)
    pch = bool(index % 2 == 0)
    c = random_costs(rng, pch) if randomise_costs else replace(UMTS_COSTS, pch_enabled=pch)
    return p, c, compare_with_oracle(p, c)


def oracle_batch(n: int, seed: int, workers: int = 1, randomise_costs: bool = True):
    """Compare ``n`` random parameter sets (alternating PCH on/off), in index order."""
    jobs = [(seed, i, randomise_costs) for i in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_one_random, jobs, chunksize=max(1, n // (4 * workers))))
    return [_one_random(j) for j in jobs]


@dataclass(frozen=True)
class SimulationCheck:
    metric: str
    analytic: float
    mean: float
    stderr: float

    @property
    def z(self) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == self.analytic else np.inf
        return (self.mean - self.analytic) / self.stderr


def compare_with_simulation(p: ModelParams, c: SignallingCosts, seed: int,
                            replications: int = 10, horizon: float = 1e6) -> list[SimulationCheck]:
    rep = evaluate_loads(p, c)
    analytic = {"gamma_r": rep.gamma_r, "gamma_c": rep.gamma_c, **rep.occupancy.as_dict()}
    est = confidence(simulate(build_transition_table(p, c), seed, horizon, replications))
    return [SimulationCheck(k, analytic[k], e.mean, e.stderr) for k, e in est.items()]
