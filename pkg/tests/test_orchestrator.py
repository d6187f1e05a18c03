import numpy as np
import pytest

from anaconda_sim.agent import Agent, AgentConfig, default_reward_scale
from anaconda_sim.clock import TimeModel
from anaconda_sim.objective import ActionId, ModularObjective
from anaconda_sim.orchestrator import (
    ConfigurationError,
    UnsupportedSizeError,
    network_discount,
    regret_diagnostics,
    run,
)


def agents_for(f, alpha, T, cands=None):
    n = f.n_agents
    return [
        Agent(
            AgentConfig(
                i,
                f.action_counts[i],
                cands[i] if cands else tuple(j for j in range(n) if j != i),
                alpha,
                T,
                default_reward_scale(f, i),
            ),
            f,
        )
        for i in range(n)
    ]


def test_kernel_and_reference_backends_identical(small_coverage):
    T = 60
    traces = []
    for backend in ("reference", "kernel"):
        ags = agents_for(small_coverage, 2, T)
        traces.append(run(ags, small_coverage, TimeModel(0.01, 0.05), T, 11, backend=backend))
    ref, ker = traces
    assert ker.backend == "kernel"
    for name in ("actions", "draws", "f_values", "eval_counts", "comm_messages", "sim_time"):
        assert np.array_equal(getattr(ref, name), getattr(ker, name)), name
    assert ref.clamp_count == ker.clamp_count


def test_learner_state_synced_after_kernel_run(small_coverage):
    T = 30
    a = agents_for(small_coverage, 1, T)
    b = agents_for(small_coverage, 1, T)
    run(a, small_coverage, TimeModel(0.01, 0.05), T, 2, backend="reference")
    run(b, small_coverage, TimeModel(0.01, 0.05), T, 2, backend="kernel")
    for x, y in zip(a, b):
        assert np.allclose(x.mwu.log_weights, y.mwu.log_weights, rtol=0, atol=1e-12)
        for lx, ly in zip(x.bank.learners, y.bank.learners):
            assert np.allclose(lx.log_weights, ly.log_weights, rtol=0, atol=1e-12)


def test_same_seed_same_trace(small_coverage):
    t1 = run(agents_for(small_coverage, 1, 40), small_coverage, TimeModel(0.01, 0.05), 40, 5)
    t2 = run(agents_for(small_coverage, 1, 40), small_coverage, TimeModel(0.01, 0.05), 40, 5)
    t3 = run(agents_for(small_coverage, 1, 40), small_coverage, TimeModel(0.01, 0.05), 40, 6)
    assert np.array_equal(t1.actions, t2.actions)
    assert not np.array_equal(t1.actions, t3.actions)


def test_sim_time_accumulates_round_cost(small_coverage):
    T, alpha = 10, 2
    tr = run(agents_for(small_coverage, alpha, T), small_coverage, TimeModel(0.01, 0.05), T, 0)
    per_round = 0.01 * (4 + 2 * alpha + 1) + 0.05
    assert np.allclose(tr.sim_time, per_round * np.arange(1, T + 1))


def test_message_ledger_and_snapshots(small_coverage):
    T = 8
    ags = agents_for(small_coverage, 2, T)
    tr = run(ags, small_coverage, TimeModel(0.01, 0.05), T, 3, record_messages=True)
    assert tr.backend == "reference"
    for t in range(T):
        snap = tr.snapshot(t)
        assert snap.exchange_phases == 1
        assert snap.comm_messages == len(tr.messages[t])
        assert snap.comm_messages == sum(len(h) for h in snap.neighborhoods)
        for m in tr.messages[t]:
            assert m.payload == snap.actions[m.sender]
    assert len(tr.snapshots) == T


def test_fully_decentralized_run_has_no_messages(small_coverage):
    tr = run(agents_for(small_coverage, 0, 20), small_coverage, TimeModel(0.01, 0.05), 20, 0)
    assert tr.comm_messages.sum() == 0
    assert (tr.eval_counts == 4 + 1).all()


def test_validation_errors(small_coverage):
    ags = agents_for(small_coverage, 1, 10)
    with pytest.raises(ConfigurationError):
        run(ags, small_coverage, TimeModel(0.01, 0.05), 11, 0)
    with pytest.raises(ConfigurationError):
        run(ags[:-1], small_coverage, TimeModel(0.01, 0.05), 10, 0)
    with pytest.raises(ConfigurationError):
        run(agents_for(ModularObjective([[1.0]] * 5), 1, 10), small_coverage, TimeModel(0.01, 0.05), 10, 0)
    with pytest.raises(ValueError):
        run(ags, small_coverage, TimeModel(0.01, 0.05), 10, 0, backend="gpu")


def test_kernel_backend_needs_coverage():
    f = ModularObjective([[1.0, 2.0]] * 3)
    with pytest.raises(ConfigurationError):
        run(agents_for(f, 1, 5), f, TimeModel(0.01, 0.05), 5, 0, backend="kernel")


def test_network_discount():
    assert network_discount(0.0) == 1.0
    assert network_discount(1.0) == pytest.approx(1 - np.exp(-1))
    assert network_discount(0.5) > network_discount(1.0)


def test_regret_on_modular_objective_is_exact():
    # modular: no overlap, so network regret is zero and the best action is the heaviest
    f = ModularObjective([[0.1, 0.9], [0.5, 0.2], [0.3, 0.3]])
    T = 50
    ags = agents_for(f, 1, T)
    tr = run(ags, f, TimeModel(0.01, 0.05), T, 0)
    reps = regret_diagnostics(tr, f, ags)
    assert reps[0].best_action == 1
    played = sum(f.weights[0][c] for c in tr.actions[:, 0])
    assert reps[0].action_regret == pytest.approx(0.9 * T - played)
    assert all(r.network_regret == pytest.approx(0.0) for r in reps)
    assert reps[0].discount == 1.0


def test_regret_refuses_large_candidate_sets():
    f = ModularObjective([[1.0]] * 17)
    ags = agents_for(f, 1, 2)
    tr = run(ags, f, TimeModel(0.01, 0.05), 2, 0)
    with pytest.raises(UnsupportedSizeError):
        regret_diagnostics(tr, f, ags)
