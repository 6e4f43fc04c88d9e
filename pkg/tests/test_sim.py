import math

import numpy as np
import pytest

from sigstorm.analytic import evaluate_loads
from sigstorm.model import UMTS_COSTS, State, build_transition_table, with_pch
from sigstorm.presets import FIG2, FIG3
from sigstorm.sim import METRICS, confidence, simulate, sort_replications

TABLE = build_transition_table(FIG2.with_attack(0.01, 0.01), UMTS_COSTS)


def test_rerun_is_bit_identical():
    a = simulate(TABLE, seed=9, horizon=2e5, replications=3)
    b = simulate(TABLE, seed=9, horizon=2e5, replications=3)
    for k in METRICS:
        assert np.array_equal(a.per_replication()[k], b.per_replication()[k])


def test_seeds_and_replications_are_distinct_streams():
    a = simulate(TABLE, seed=9, horizon=2e5, replications=2)
    b = simulate(TABLE, seed=10, horizon=2e5, replications=2)
    assert a.n_messages[0] != a.n_messages[1]
    assert a.n_messages[0] != b.n_messages[0]


def test_replication_ids_select_streams():
    full = simulate(TABLE, seed=4, horizon=1e5, replications=3)
    one = simulate(TABLE, seed=4, horizon=1e5, replication_ids=[2])
    assert one.n_messages[0] == full.n_messages[2]
    merged = sort_replications(simulate(TABLE, 4, 1e5, replication_ids=[2])
                               .merge(simulate(TABLE, 4, 1e5, replication_ids=[0, 1])))
    assert merged.replication_ids == (0, 1, 2)
    assert np.array_equal(merged.m_messages, full.m_messages)


def test_time_is_fully_accounted():
    s = simulate(TABLE, seed=1, horizon=5e4, replications=2)
    total = sum(s.time_in_state[st] for st in State) + s.signalling_time
    assert np.allclose(total, 5e4, rtol=1e-12)
    occ = s.per_replication()
    assert np.allclose(sum(occ[k] for k in METRICS[2:]), 1.0)


def test_pch_disabled_never_visits_paging():
    t = build_transition_table(FIG3.with_attack(0.02, 0.0), with_pch(UMTS_COSTS, False))
    s = simulate(t, seed=2, horizon=1e5, replications=2)
    assert (s.time_in_state[State.P] == 0).all()


def test_agrees_with_closed_form():
    p = FIG3.with_attack(0.02, 0.0)
    rep = evaluate_loads(p, UMTS_COSTS)
    est = confidence(simulate(build_transition_table(p, UMTS_COSTS), seed=3, horizon=1e6, replications=10))
    assert abs(est["gamma_c"].mean - rep.gamma_c) <= 4 * est["gamma_c"].stderr
    assert abs(est["gamma_r"].mean - rep.gamma_r) <= 4 * est["gamma_r"].stderr
    assert not est["gamma_r"].imprecise


def test_confidence_flags_short_runs():
    est = confidence(simulate(TABLE, seed=1, horizon=2e3, replications=3))
    assert est["gamma_c"].imprecise and est["gamma_c"].rel_half_width > 0.05


def test_argument_checks():
    with pytest.raises(ValueError):
        confidence(simulate(TABLE, seed=1, horizon=1e3, replications=1))
    with pytest.raises(ValueError):
        simulate(TABLE, seed=1, horizon=0.0)
    with pytest.raises(ValueError):
        simulate(TABLE, seed=1, horizon=1e3).merge(simulate(TABLE, seed=1, horizon=2e3))
