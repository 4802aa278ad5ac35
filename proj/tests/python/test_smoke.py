import math
import random

import pytest

import dwc


def test_thresholds_match_ticks():
    t = dwc.compute_thresholds(63)
    assert len(t) == 63
    assert t[0] == -10.0 and t[31] == 0.0 and t[62] == 10.0
    assert abs(t[1] - (-8.6410)) < 5e-3
    with pytest.raises(dwc.ConfigError):
        dwc.compute_thresholds(4)


def test_inverse_cdf():
    assert dwc.inverse_normal_cdf(0.5) == 0.0
    assert math.isclose(dwc.inverse_normal_cdf(0.975), 1.959963984540054, rel_tol=1e-12)


def test_policy_and_circuit_agree():
    p = dwc.random_policy(3, 2, layers=2, width=32, arity=4, bits=15, seed=3)
    assert p.act_dim == 2 and p.obs_dim == 3 and p.group_size == 16
    c = dwc.compile(p)
    rng = random.Random(0)
    lo, hi = -(1 << 15), (1 << 15) - 1
    for _ in range(500):
        raw = [rng.randint(lo, hi) for _ in range(3)]
        assert c.eval(raw) == dwc.reference_action_words(p, c, raw)
    table = c.action_table(0)
    assert table == sorted(table)


def test_rtl_and_resources():
    c = dwc.compile(dwc.random_policy(2, 1, width=16, arity=3, bits=7))
    text = c.rtl(stages=1)
    assert "module dwc_policy" in text
    r = c.resources(stages=2)
    assert r["latency_cycles"] == 3
    assert r["lut_count"] >= 32
    with pytest.raises(dwc.ConfigError):
        c.rtl(stages=3)


def test_histograms_conserve_slots():
    p = dwc.random_policy(4, 1, layers=1, width=20, arity=5, bits=7, seed=1)
    assert sum(p.connection_histogram()) == 100
    assert sum(p.bit_histogram()) == 100


def test_save_load_roundtrip(tmp_path):
    p = dwc.random_policy(2, 1, width=16, arity=3, bits=7, seed=2)
    path = str(tmp_path / "m.dwc")
    p.save(path)
    q = dwc.load_policy(path)
    assert q.action([0.1, -0.4]) == p.action([0.1, -0.4])
    c = dwc.compile(q)
    c.save(str(tmp_path / "m.dwcc"))
    assert dwc.load_circuit(str(tmp_path / "m.dwcc")).eval([5, -7]) == c.eval([5, -7])
    with pytest.raises(dwc.FormatError):
        dwc.load_policy(str(tmp_path / "missing.dwc"))


def test_tiny_training_run():
    text = "\n".join([
        "env = pendulum", "total_steps = 300", "width = 16", "arity = 4", "bits = 7",
        "learning_starts = 100", "batch_size = 16", "critic_hidden = 16",
        "explore_hidden = 8", "eval_interval = 300", "eval_episodes = 1",
    ])
    p = dwc.train(text)
    assert p.frozen
    returns = dwc.evaluate(p, "pendulum", episodes=2, seed=1)
    assert len(returns) == 2 and all(r < 0 for r in returns)
    assert len(dwc.config_hash(text)) == 16
    with pytest.raises(dwc.ConfigError):
        dwc.train("env = pendulum")
