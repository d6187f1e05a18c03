import math

import numpy as np
import pytest

from anaconda_sim import kernels
from anaconda_sim.bandit import Exp3IxBank, Exp3IxLearner, MwuLearner, learner_stream


def test_mwu_rate():
    assert MwuLearner(8, 10_000).eta == pytest.approx(math.sqrt(8 * math.log(8) / 10_000))


def test_mwu_single_update_by_hand():
    m = MwuLearner(2, 100)
    m.eta = 0.5
    m.update([1.0, 0.0])
    assert np.allclose(m.weights, [math.exp(0.5), 1.0])
    p = m.distribution()
    assert p[0] == pytest.approx(math.exp(0.5) / (1 + math.exp(0.5)))


def test_mwu_rejects_out_of_range_reward():
    m = MwuLearner(3, 10)
    with pytest.raises(ValueError, match="arm 1"):
        m.update([0.2, 1.5, 0.0])
    with pytest.raises(ValueError):
        m.update([0.2, 0.3])


def test_mwu_survives_long_horizon_without_overflow():
    m = MwuLearner(4, 10)
    m.eta = 50.0
    for _ in range(100):
        m.update([1.0, 0.0, 0.0, 0.0])
    p = m.distribution()
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0)


def test_mwu_single_arm_has_zero_rate():
    m = MwuLearner(1, 50)
    assert m.eta == 0.0
    assert m.sample(np.random.default_rng(0)) == 0


def test_exp3ix_rates():
    e = Exp3IxLearner(5, 1000)
    assert e.eta == pytest.approx(math.sqrt(2 * math.log(5) / (5 * 1000)))
    assert e.gamma == pytest.approx(e.eta / 2)


def test_exp3ix_estimate_by_hand():
    e = Exp3IxLearner(3, 100)
    e.eta, e.gamma = 0.1, 0.1
    est = e.update(chosen=1, q_chosen=0.5, reward=0.8)
    # 1 - (1 - 0.8) / (0.5 + 0.1)
    assert est == pytest.approx(2 / 3)
    assert np.allclose(e.log_weights, [0.1, 0.1 * 2 / 3, 0.1])


def test_exp3ix_estimate_never_above_one():
    e = Exp3IxLearner(4, 100)
    for r in (0.0, 0.3, 1.0):
        assert e.update(0, 0.25, r) <= 1.0


def test_exp3ix_rejects_bad_probability():
    with pytest.raises(ValueError):
        Exp3IxLearner(2, 10).update(0, 0.0, 0.5)


def test_exp3ix_learns_best_arm():
    rng = np.random.default_rng(1)
    e = Exp3IxLearner(4, 20_000)
    means = np.array([0.2, 0.8, 0.4, 0.5])
    for _ in range(20_000):
        a, q = e.step(rng)
        e.update(a, q, float(rng.random() < means[a]))
    assert int(np.argmax(e.distribution())) == 1


def test_bank_has_one_learner_per_slot():
    b = Exp3IxBank(3, 7, 100)
    assert len(b) == 3
    assert b[0] is not b[1]
    assert len(Exp3IxBank(2, 0, 10)) == 0


def test_streams_are_independent_and_reproducible():
    a = learner_stream(5, 0, 0).random(4)
    assert np.array_equal(a, learner_stream(5, 0, 0).random(4))
    assert not np.array_equal(a, learner_stream(5, 0, 1).random(4))
    assert not np.array_equal(a, learner_stream(5, 1, 0).random(4))


def test_scalar_and_batched_draws_agree():
    g1, g2 = learner_stream(9, 2, 1, 3), learner_stream(9, 2, 1, 3)
    assert np.array_equal([g1.random() for _ in range(50)], g2.random(50))


def test_sampling_frequencies_follow_distribution():
    logw = np.log(np.array([0.1, 0.6, 0.3]))
    rng = np.random.default_rng(0)
    counts = np.bincount([kernels.sample_index(logw, 3, rng.random())[0] for _ in range(20_000)], minlength=3)
    assert np.allclose(counts / counts.sum(), [0.1, 0.6, 0.3], atol=0.015)


def test_mwu_regret_bound_on_adversarial_alternation():
    # the reward flips between two arms; expected reward under the played
    # distribution must trail the best arm by at most the Hedge bound
    T = 4000
    R = np.zeros((T, 2))
    R[::2, 0] = 1.0
    R[1::2, 1] = 1.0
    m = MwuLearner(2, T)
    got = 0.0
    for t in range(T):
        got += float(m.distribution() @ R[t])
        m.update(R[t])
    assert R.sum(axis=0).max() - got <= math.sqrt(T * math.log(2) / 2)
