import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsl.adversary import BlindFixed, BlindRandom, Measured, strategy_bound
from qsl.harness import (
    CostReport,
    EventLog,
    ExperimentConfig,
    ExperimentResult,
    _object_range,
    _vector_range,
    binomial_z,
    choose_flips,
    cost_accounting,
    run_forging,
    run_honest,
)
from qsl.identification import f_bound
from qsl.qubit import CELLS
from qsl.seeding import CounterRng

STRATEGIES = [BlindRandom(), BlindFixed(CELLS[3]), Measured(1), Measured(2)]


@pytest.mark.parametrize("strategy", STRATEGIES, ids=str)
@pytest.mark.parametrize("fixed", [False, True])
def test_engines_agree_trial_by_trial(strategy, fixed):
    cfg = ExperimentConfig(lam=3, l=4, n_participants=4, k_colluders=2, trials=300,
                           master_seed=11, strategy=strategy, flips=2, fixed_positions=fixed)
    for t in range(cfg.trials):
        obj = _object_range(cfg, t, t + 1, True, None)
        vec = _vector_range(cfg, t, t + 1, True)
        assert np.array_equal(obj, vec), t
    assert np.array_equal(_object_range(cfg, 0, 300, True, None), _vector_range(cfg, 0, 300, True))


def test_engines_agree_honest():
    cfg = ExperimentConfig(lam=2, l=3, trials=200, master_seed=5)
    assert np.array_equal(_object_range(cfg, 0, 200, False, None), _vector_range(cfg, 0, 200, False))


@given(lam=st.integers(1, 4), l=st.integers(1, 4), seed=st.integers(0, 2**64 - 1),
       k=st.integers(0, 3), data=st.data())
@settings(max_examples=30)
def test_engines_agree_property(lam, l, seed, k, data):
    flips = data.draw(st.integers(1, l))
    strategy = Measured(k) if k else BlindRandom()
    cfg = ExperimentConfig(lam=lam, l=l, n_participants=k + 1, k_colluders=k, trials=40,
                           master_seed=seed, strategy=strategy, flips=flips)
    assert np.array_equal(_object_range(cfg, 0, 40, True, None), _vector_range(cfg, 0, 40, True))


def test_runs_are_deterministic_and_thread_independent():
    cfg = ExperimentConfig(lam=2, l=3, n_participants=3, k_colluders=2, trials=50_000,
                           master_seed=99, strategy=Measured(2), flips=1)
    a = run_forging(cfg, threads=1)
    b = run_forging(cfg, threads=4)
    c = run_forging(cfg)
    assert a == b == c
    assert a.to_json() == b.to_json()


def test_object_engine_threads_match():
    cfg = ExperimentConfig(lam=2, l=2, k_colluders=1, trials=400, strategy=Measured(1))
    assert run_forging(cfg, engine="object", threads=1) == run_forging(cfg, engine="object", threads=3)


def test_different_seeds_differ():
    base = dict(lam=1, l=1, trials=2000, strategy=BlindRandom())
    a = run_forging(ExperimentConfig(master_seed=1, **base))
    b = run_forging(ExperimentConfig(master_seed=2, **base))
    assert a.accept_count != b.accept_count


def _within(result, sigmas=3.0):
    return result.z_score is not None and abs(result.z_score) <= sigmas


BOUND_MATRIX = [(k, lam, K) for k in range(4) for lam in range(1, 11) for K in (1, 2)]


@pytest.mark.parametrize("k,lam,K", BOUND_MATRIX)
def test_bound_compliance_matrix(k, lam, K):
    strategy = Measured(k) if k else BlindRandom()
    cfg = ExperimentConfig(lam=lam, l=2, n_participants=k + 1, k_colluders=k, trials=20_000,
                           master_seed=1000 * k + 10 * lam + K, strategy=strategy, flips=K)
    res = run_forging(cfg)
    p = f_bound(k) ** (K * lam)
    assert res.bound == pytest.approx(p, rel=1e-12)
    # four-sigma gate over 80 cells keeps the family-wise false alarm rate small
    assert abs(res.empirical_rate - p) <= max(4 * (p * (1 - p) / cfg.trials) ** 0.5, 1 / cfg.trials)


def test_per_qubit_and_block_rates():
    cfg = ExperimentConfig(lam=3, l=2, n_participants=3, k_colluders=2, trials=100_000,
                           strategy=Measured(2), master_seed=3)
    res = run_forging(cfg)
    f = f_bound(2)
    n_q = cfg.trials * cfg.lam
    assert abs(res.qubit_accept_rate - f) <= 3 * (f * (1 - f) / n_q) ** 0.5
    assert abs(res.block_accept_rate - f**3) <= 3 * (f**3 * (1 - f**3) / cfg.trials) ** 0.5


def test_honest_runs_always_accept():
    for engine in ("object", "vector"):
        res = run_honest(ExperimentConfig(lam=3, l=5, n_participants=4, trials=500), engine=engine)
        assert res.accept_count == 500 and res.bound == 1.0 and res.z_score == 0.0
        assert res.strategy == "honest"


def test_event_log_accounting():
    lam, l, N, k, trials = 3, 4, 4, 2, 5
    cfg = ExperimentConfig(lam=lam, l=l, n_participants=N, k_colluders=k, trials=trials,
                           strategy=Measured(2))
    log = EventLog()
    run_forging(cfg, log=log)
    for t in range(trials):
        assert log.volume("public_key", trial=t) == N * 2 * lam * l
        assert log.volume("private_key", trial=t) == 4 * lam * l
        assert log.volume("signature", trial=t, sender="alice") == 2 * lam * l
        assert log.volume("signature", trial=t, sender="adversary") == 2 * lam * l
        assert log.count("register_handover", trial=t) == k
        assert log.volume("message", trial=t, sender="alice") == l
    text = log.to_csv()
    assert text.splitlines()[0] == "trial,step,sender,receiver,kind,size_bits"
    assert len(text.splitlines()) == len(log) + 1
    buf = io.StringIO()
    log.write_csv(buf)
    assert buf.getvalue() == text


def test_honest_event_log():
    log = EventLog()
    run_honest(ExperimentConfig(lam=2, l=2, n_participants=3, trials=2), log=log)
    recs = [r for r in log.records if r.trial == 0]
    assert [(r.sender, r.receiver, r.kind) for r in recs][-2:] == [
        ("alice", "p0", "message"), ("alice", "p0", "signature")]
    assert log.volume("public_key", trial=0) == 3 * 8


def test_log_requires_object_engine():
    with pytest.raises(ValueError):
        run_honest(ExperimentConfig(lam=1, trials=1), engine="vector", log=EventLog())
    with pytest.raises(ValueError):
        run_honest(ExperimentConfig(lam=1, trials=1), engine="gpu")


def test_cost_accounting_examples():
    assert cost_accounting(300, 100) == CostReport(120_000, 60_000, 60_000, 240_000)
    assert cost_accounting(1, 1) == CostReport(4, 2, 2, 8)
    with pytest.raises(ValueError):
        cost_accounting(0, 3)


@given(st.integers(1, 500), st.integers(1, 500), st.integers(1, 5))
def test_cost_is_linear(lam, l, s):
    a, b = cost_accounting(lam, l), cost_accounting(s * lam, l)
    assert b.total == s * a.total == s * 8 * lam * l
    assert cost_accounting(lam, s * l).c1 == s * a.c1


@pytest.mark.parametrize("kwargs", [
    dict(lam=0), dict(lam=1, l=0), dict(lam=1, n_participants=2, k_colluders=2),
    dict(lam=1, trials=0), dict(lam=1, l=2, flips=3), dict(lam=1, flips=0),
    dict(lam=1, n_participants=3, k_colluders=1, strategy=Measured(2)),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_choose_flips():
    assert choose_flips(5, 3, CounterRng(0), fixed=True) == (0, 1, 2)
    rng = CounterRng(4)
    seen = set()
    for _ in range(2000):
        pos = choose_flips(4, 2, rng)
        assert len(set(pos)) == 2 and list(pos) == sorted(pos)
        seen.add(pos)
    assert len(seen) == 6


def test_binomial_z():
    assert binomial_z(50, 100, 0.5) == 0.0
    assert binomial_z(60, 100, 0.5) == pytest.approx(2.0)
    assert binomial_z(3, 3, 1.0) == 0.0
    assert binomial_z(2, 3, 1.0) is None


def test_result_round_trip():
    res = run_forging(ExperimentConfig(lam=2, l=2, trials=1000, flips=2))
    d = json.loads(res.to_json(extended=True))
    assert ExperimentResult.from_dict(d) == res
    assert list(res.to_dict()) == ["lambda", "l", "n_participants", "k_colluders", "trials",
                                   "flips", "strategy", "accept_count", "empirical_rate",
                                   "bound", "z_score", "master_seed"]
    assert res.bound == strategy_bound(BlindRandom(), 2, 2) == 1 / 16
