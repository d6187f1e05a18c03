import math

import numpy as np
import pytest

from anaconda_sim.harness import (
    ConfigError,
    ExperimentConfig,
    VariantKey,
    anaconda_horizon,
    candidate_sets,
    locf,
    run_sweep,
    sample_world,
    trial_seed,
)

TINY = dict(width=30, height=30, agent_count=4, trials=2, horizon=50, nmax_sweep=[0, 1], tau_pairs=[[0.01, 0.05]])


def test_defaults_describe_the_benchmark():
    c = ExperimentConfig()
    assert (c.agent_count, c.fov_radius, c.directions, c.trials) == (60, 7.0, 8, 30)
    assert c.nmax_sweep == [0, 1, 3, 5]
    assert c.tau_pairs == [(0.01, 0.05), (0.01, 0.01), (0.05, 0.01)]


def test_unknown_key_and_bad_values_rejected():
    with pytest.raises(ConfigError, match="widht"):
        ExperimentConfig.from_dict({"widht": 3})
    with pytest.raises(ConfigError, match="tau_pairs"):
        ExperimentConfig.from_dict({"tau_pairs": [[0.01, 0.0]]})
    with pytest.raises(ConfigError, match="range_low"):
        ExperimentConfig.from_dict({"range_low": 30})


def test_dict_round_trip():
    c = ExperimentConfig.from_dict(TINY)
    assert ExperimentConfig.from_dict(c.to_dict()) == c


def test_horizon_from_budget():
    c = ExperimentConfig()
    # 100 s / (0.01 * (8 + 2*5 + 1) + 0.05) = 416.67
    assert anaconda_horizon(c, [5, 3], 0.01, 0.05) == 417
    assert anaconda_horizon(c, [0], 0.01, 0.05) == math.ceil(100 / 0.14 - 1e-9)
    assert anaconda_horizon(ExperimentConfig(horizon=9), [5], 0.01, 0.05) == 9


def test_trial_seeds_distinct_and_stable():
    seeds = [trial_seed(0, k) for k in range(30)]
    assert len(set(seeds)) == 30
    assert seeds == [trial_seed(0, k) for k in range(30)]


def test_sample_world_within_bounds():
    c = ExperimentConfig()
    w, r = sample_world(c, 1)
    assert w.camera_positions.shape == (60, 2)
    assert (w.camera_positions >= 0).all() and (w.camera_positions <= 100).all()
    assert ((r >= 15) & (r <= 20)).all()


def test_candidate_sets_respect_receiver_range():
    pos = np.array([[0, 0], [10, 0], [30, 0]], dtype=float)
    assert candidate_sets(pos, np.array([10.0, 25.0, 5.0])) == [(1,), (0, 2), ()]


def test_locf():
    t = np.array([0.5, 1.0, 2.0])
    v = np.array([1.0, 2.0, 3.0])
    g = np.array([0.0, 0.5, 0.7, 1.0, 5.0])
    assert np.array_equal(locf(t, v, g), [0.0, 1.0, 1.0, 2.0, 3.0])


def test_tiny_sweep_shapes_and_threads_agree():
    c = ExperimentConfig.from_dict(TINY)
    a = run_sweep(c)
    b = run_sweep(c, threads=2)
    keys = {VariantKey("anaconda", 0, 0.01, 0.05), VariantKey("anaconda", 1, 0.01, 0.05), VariantKey("dfssg", None, 0.01, 0.05)}
    assert set(a.curves) == keys
    for k in keys:
        assert np.array_equal(a.curves[k].mean_coverage, b.curves[k].mean_coverage)
        assert len(a.traces[k]) == 2
    tr = a.traces[VariantKey("anaconda", 1, 0.01, 0.05)][0]
    assert len(tr.t) == 50
    assert ((tr.coverage_fraction >= 0) & (tr.coverage_fraction <= 1)).all()
    grid = a.curves[VariantKey("dfssg", None, 0.01, 0.05)].time_grid
    assert grid[0] == 0.0 and grid[-1] >= c.time_budget


def test_final_coverage_is_tail_mean():
    c = ExperimentConfig.from_dict(TINY)
    res = run_sweep(c)
    k = VariantKey("anaconda", 1, 0.01, 0.05)
    tr = res.traces[k][0]
    assert res.finals(k)[0] == pytest.approx(tr.coverage_fraction[-5:].mean())


def test_default_reward_scale_never_clamps():
    c = ExperimentConfig.from_dict({**TINY, "agent_count": 8, "nmax_sweep": [0, 3], "include_dfssg": False})
    res = run_sweep(c)
    assert all(tr.flags["clamps"] == 0 for traces in res.traces.values() for tr in traces)
