import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eprsim import ConfigError, RunConfig, efficiency_gate, run_setting, sweep
from eprsim.engine import CoincidenceTally, map_settings, tally_pairs, worker_count
from eprsim.model import SwitchOutcome, dead_band_fraction, emit_pair, measure, DetectorSettings
from eprsim.rng import substream

from conftest import binomial_sigma


@pytest.mark.parametrize(
    "kw",
    [
        {"steps": 0},
        {"pairs_per_setting": 0},
        {"threshold": 0.5},
        {"threshold": -0.1},
        {"efficiency": 0.0},
        {"efficiency": 1.01},
        {"decoherence": 1.5},
        {"alpha_start": 1.0, "alpha_end": 0.5},
        {"seed": -1},
        {"seed": 2**64},
        {"beta": float("nan")},
    ],
)
def test_invalid_configs_rejected(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_default_grid():
    a = RunConfig().alphas()
    assert a.size == 101
    assert a[0] == 0.0 and a[-1] == pytest.approx(math.pi)
    assert np.allclose(np.diff(a), math.pi / 100)


def test_efficiency_gate_full():
    assert all(efficiency_gate(j, 1.0) for j in range(1000))


def test_efficiency_gate_half_records_odd_indices():
    recorded = [j for j in range(20) if efficiency_gate(j, 0.5)]
    assert recorded == list(range(1, 20, 2))


def test_efficiency_gate_tenth():
    gates = [math.floor((j + 1) * 0.1) - math.floor(j * 0.1) == 1 for j in range(1000)]
    assert sum(gates) == 100
    assert int(np.sum(efficiency_gate(np.arange(1000), 0.1))) == 100


@given(st.integers(1, 5000), st.floats(0.001, 1.0))
def test_efficiency_gate_count(n, eta):
    got = int(np.sum(efficiency_gate(np.arange(n), eta)))
    assert abs(got - math.floor(n * eta)) <= 1


def test_bulk_tally_matches_per_pair_streams():
    cfg = RunConfig(seed=77, pairs_per_setting=300, threshold=0.07, decoherence=0.4, efficiency=0.6)
    alpha, k = 0.9, 5
    counts = np.zeros((3, 3), dtype=int)
    for j in range(cfg.pairs_per_setting):
        pair = emit_pair(substream(cfg.seed, k, j), cfg.delta, cfg.decoherence)
        if not efficiency_gate(j, cfg.efficiency):
            continue
        x1, x2 = pair.photon_angles
        o1 = measure(x1, DetectorSettings(alpha, cfg.threshold))
        o2 = measure(x2, DetectorSettings(cfg.beta, cfg.threshold))
        counts[o1, o2] += 1
    tally = run_setting(cfg, alpha, k)
    assert np.array_equal(tally.counts, counts)
    assert tally.emitted == 300 and tally.recorded == counts.sum() == 180


def test_chunking_does_not_change_tally():
    cfg = RunConfig(seed=4, pairs_per_setting=1000, decoherence=0.2)
    whole = tally_pairs(cfg, 0.4, 0.0, 2, 0, 1000)
    parts = tally_pairs(cfg, 0.4, 0.0, 2, 0, 337) + tally_pairs(cfg, 0.4, 0.0, 2, 337, 1000)
    assert whole == parts


def test_tally_merge_is_commutative_and_associative():
    cfg = RunConfig(seed=4, pairs_per_setting=10)
    a, b, c = (run_setting(cfg, x, i) for i, x in enumerate((0.1, 0.2, 0.3)))
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)


def _lambda_grid_pp(alpha, beta, delta, n=200_000):
    lam = (np.arange(n) + 0.5) * 2 * math.pi / n
    plus1 = np.cos(lam - alpha) ** 2 > 0.5
    plus2 = np.cos(lam + delta - beta) ** 2 > 0.5
    return np.mean(plus1 & plus2)


def test_aligned_polarizers_never_coincide():
    assert _lambda_grid_pp(0.7, 0.7, math.pi / 2) == 0.0
    cfg = RunConfig(pairs_per_setting=5000, beta=0.7)
    assert run_setting(cfg, 0.7, 0).n_pp == 0


def test_orthogonal_polarizers_give_half():
    n = 1000
    tally = run_setting(RunConfig(pairs_per_setting=n), 0.0, 0, beta=math.pi / 2)
    assert abs(tally.n_pp - n / 2) <= 3 * math.sqrt(n / 4)


def test_full_decoherence_factorizes():
    n = 200_000
    cfg = RunConfig(pairs_per_setting=n, decoherence=1.0, threshold=0.1)
    t = run_setting(cfg, 0.3, 0, beta=1.1)
    p = t.counts / t.recorded
    m1, m2 = p.sum(axis=1), p.sum(axis=0)
    for i in range(2):
        for j in range(2):
            q = m1[i] * m2[j]
            assert abs(p[i, j] - q) < 4 * binomial_sigma(q, n)


def test_sweep_default_shape(ideal):
    curve = sweep(ideal)
    assert len(curve) == 101
    assert all(s.tally.emitted == 1000 for s in curve.settings)
    assert np.all(np.diff(curve.alphas) > 0)


def test_single_step_sweep():
    curve = sweep(RunConfig(steps=1, alpha_start=0.3, alpha_end=2.0))
    assert len(curve) == 1 and curve.alphas[0] == 0.3


def test_sweep_deterministic_across_workers():
    cfg = RunConfig(seed=11, decoherence=0.3, threshold=0.05, efficiency=0.7, steps=30)
    runs = [sweep(cfg, workers=w) for w in (1, 8, 1)]
    for other in runs[1:]:
        assert all(a.tally == b.tally for a, b in zip(runs[0].settings, other.settings))


def test_conservation_and_dead_band_rows():
    curve = sweep(RunConfig(efficiency=0.3, steps=21))
    for s in curve.settings:
        t = s.tally
        assert t.counts.sum() == t.recorded == math.floor(1000 * 0.3)
        assert t.emitted == 1000
        assert t.counts[2, :].sum() == 0 and t.counts[:, 2].sum() == 0


def test_marginal_plus_rate():
    n = 400_000
    ds = 0.15
    t = run_setting(RunConfig(pairs_per_setting=n, threshold=ds, decoherence=0.3), 1.3, 0)
    expected = (1 - dead_band_fraction(ds)) / 2
    for rate in (t.counts[0, :].sum() / n, t.counts[:, 0].sum() / n):
        assert abs(rate - expected) < 4 * binomial_sigma(expected, n)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("EPR_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("EPR_THREADS", "0")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.setenv("EPR_THREADS", "x")
    with pytest.raises(ConfigError):
        worker_count()


def test_map_settings_preserves_order():
    assert map_settings(lambda x: x * 2, [(i,) for i in range(20)], workers=4) == [2 * i for i in range(20)]


def test_tally_accessors():
    t = CoincidenceTally([[1, 2, 0], [3, 4, 0], [0, 0, 5]], emitted=20, recorded=15)
    assert t.n_pp == 1 and t.definite == 10
    assert t[SwitchOutcome.UNDETECTED, SwitchOutcome.UNDETECTED] == 5
