"""Round loop: every agent acts, picks neighbors, one exchange, both learners update."""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .agent import Agent
from .clock import TimeModel
from .objective import ActionId, CoverageObjective, SubmodularObjective, curvature


class ConfigurationError(ValueError):
    pass


class UnsupportedSizeError(ValueError):
    pass


class Message(NamedTuple):
    sender: int
    receiver: int
    payload: ActionId


@dataclass
class RoundSnapshot:
    t: int
    actions: tuple
    neighborhoods: tuple
    f_value: float
    comm_messages: int
    eval_counts: tuple
    exchange_phases: int = 1


@dataclass
class SimTrace:
    """Columnar record of a run; ``snapshot(t)`` gives the per-round view."""

    actions: np.ndarray  # (T, n) choice index per agent
    draws: np.ndarray  # (T, n, alpha_max) drawn agent ids, -1 padded
    f_values: np.ndarray
    comm_messages: np.ndarray
    eval_counts: np.ndarray  # (T, n)
    sim_time: np.ndarray
    exchange_phases: np.ndarray
    messages: Optional[list] = None
    clamp_count: int = 0
    backend: str = "reference"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.f_values)

    @property
    def sim_time_axis(self) -> np.ndarray:
        return self.sim_time

    def joint_actions(self, t) -> tuple:
        return tuple(ActionId(i, int(c)) for i, c in enumerate(self.actions[t]))

    def neighborhoods(self, t) -> tuple:
        return tuple(frozenset(int(j) for j in row if j >= 0) for row in self.draws[t])

    def snapshot(self, t) -> RoundSnapshot:
        return RoundSnapshot(
            t=t,
            actions=self.joint_actions(t),
            neighborhoods=self.neighborhoods(t),
            f_value=float(self.f_values[t]),
            comm_messages=int(self.comm_messages[t]),
            eval_counts=tuple(int(e) for e in self.eval_counts[t]),
            exchange_phases=int(self.exchange_phases[t]),
        )

    @property
    def snapshots(self) -> list:
        return [self.snapshot(t) for t in range(len(self))]


def _validate(agents: Sequence[Agent], objective: SubmodularObjective, T: int):
    if T < 1:
        raise ConfigurationError("T must be >= 1")
    n = objective.n_agents
    if len(agents) != n:
        raise ConfigurationError(f"{len(agents)} agents for an objective over {n}")
    for i, ag in enumerate(agents):
        c = ag.config
        if c.id != i:
            raise ConfigurationError(f"agent at position {i} has id {c.id}")
        if c.action_count != objective.action_counts[i]:
            raise ConfigurationError(f"agent {i}: action_count {c.action_count} != {objective.action_counts[i]}")
        if any(not 0 <= j < n for j in c.candidates):
            raise ConfigurationError(f"agent {i}: candidate outside 0..{n - 1}")
        if c.horizon != T:
            raise ConfigurationError(f"agent {i}: horizon {c.horizon} != T={T}")
        if ag.objective is not objective:
            raise ConfigurationError(f"agent {i} is bound to a different objective")


def _exchange(actions: Sequence[ActionId], requests: Sequence[list]):
    """The round's single communication phase.

    Each drawn neighbor sends its own action once to the requesting agent.
    Returns per-receiver mailboxes and the message list.
    """
    mailboxes, messages = [], []
    for i, draws in enumerate(requests):
        box = {}
        for d in draws:
            if d.neighbor not in box:
                box[d.neighbor] = actions[d.neighbor]
                messages.append(Message(d.neighbor, i, actions[d.neighbor]))
        mailboxes.append(box)
    return mailboxes, messages


def _run_reference(agents, objective, clock, T, record_messages):
    n = len(agents)
    amax = max((a.config.alpha for a in agents), default=0)
    out_actions = np.zeros((T, n), dtype=np.int64)
    out_draws = np.full((T, n, amax), -1, dtype=np.int64)
    f_values = np.zeros(T)
    comm = np.zeros(T, dtype=np.int64)
    evals = np.zeros((T, n), dtype=np.int64)
    sim_time = np.zeros(T)
    phases = np.zeros(T, dtype=np.int64)
    ledger = [] if record_messages else None

    for t in range(T):
        acts = [ag.select_action() for ag in agents]
        requests = [ag.draw_neighbors() for ag in agents]
        mailboxes, messages = _exchange(acts, requests)
        phases[t] += 1
        for i, ag in enumerate(agents):
            ag.update_neighbor_learners(acts[i], requests[i], mailboxes[i].__getitem__)
            ag.update_action_learner(mailboxes[i].values())
            out_actions[t, i] = acts[i].choice
            for d in requests[i]:
                out_draws[t, i, d.slot] = d.neighbor
            evals[t, i] = ag.round_evals
        # realised value is a metric, kept off the agents' counters
        f_values[t] = objective._value(frozenset(acts))
        comm[t] = len(messages)
        if ledger is not None:
            ledger.append(messages)
        clock.charge_anaconda_round(evals[t])
        sim_time[t] = clock.elapsed

    return SimTrace(
        out_actions,
        out_draws,
        f_values,
        comm,
        evals,
        sim_time,
        phases,
        messages=ledger,
        clamp_count=sum(a.clamp_count for a in agents),
        backend="reference",
    )


def _run_kernel(agents, objective: CoverageObjective, clock, T):
    n = len(agents)
    D = objective.world.directions
    amax = max((a.config.alpha for a in agents), default=0)
    mmax = max((len(a.config.candidates) for a in agents), default=0)
    cand = np.zeros((n, max(mmax, 1)), dtype=np.int64)
    ncand = np.zeros(n, dtype=np.int64)
    alpha = np.zeros(n, dtype=np.int64)
    eta1 = np.zeros(n)
    eta2 = np.zeros(n)
    gamma = np.zeros(n)
    scale = np.zeros(n)
    u_act = np.zeros((n, T))
    u_nb = np.zeros((n, amax, T))
    logw_act = np.zeros((n, D))
    logw_nb = np.zeros((n, max(amax, 1), max(mmax, 1)))
    for i, ag in enumerate(agents):
        c = ag.config
        cand[i, : len(c.candidates)] = c.candidates
        ncand[i] = len(c.candidates)
        alpha[i] = c.alpha
        eta1[i] = ag.mwu.eta
        scale[i] = c.reward_scale
        u_act[i] = ag.action_rng.random(T)
        logw_act[i] = ag.mwu.log_weights
        for k, learner in enumerate(ag.bank.learners):
            eta2[i], gamma[i] = learner.eta, learner.gamma
            u_nb[i, k] = ag.neighbor_rngs[k].random(T)
            logw_nb[i, k, : ncand[i]] = learner.log_weights

    actions = np.zeros((T, n), dtype=np.int64)
    draws = np.full((T, n, amax), -1, dtype=np.int64)
    f_values = np.zeros(T)
    evals = np.zeros((T, n), dtype=np.int64)
    messages = np.zeros(T, dtype=np.int64)
    clamps = kernels.simulate_anaconda(
        objective.cells,
        objective.ncells,
        objective.n_grid,
        float(objective.cell_area),
        D,
        cand,
        ncand,
        alpha,
        eta1,
        eta2,
        gamma,
        scale,
        u_act,
        u_nb,
        logw_act,
        logw_nb,
        actions,
        draws,
        f_values,
        evals,
        messages,
    )
    for i, ag in enumerate(agents):
        ag.mwu.log_weights[:] = logw_act[i]
        for k, learner in enumerate(ag.bank.learners):
            learner.log_weights[:] = logw_nb[i, k, : ncand[i]]
        ag.current_action = ActionId(i, int(actions[-1, i]))
    objective.evaluations += int(evals.sum())

    sim_time = np.zeros(T)
    for t in range(T):
        clock.charge_anaconda_round(evals[t])
        sim_time[t] = clock.elapsed
    return SimTrace(
        actions,
        draws,
        f_values,
        messages,
        evals,
        sim_time,
        np.ones(T, dtype=np.int64),
        clamp_count=int(clamps),
        backend="kernel",
    )


def run(
    agents: Sequence[Agent],
    objective: SubmodularObjective,
    clock: TimeModel,
    T: int,
    master_seed: int,
    backend: str = "auto",
    record_messages: bool = False,
) -> SimTrace:
    """Play ``T`` rounds.

    ``backend`` is ``"reference"`` (object-level agents, any objective),
    ``"kernel"`` (fused loop, coverage objective only) or ``"auto"``.
    Agents are reset from ``master_seed`` first, so equal seeds give equal
    traces on either backend.
    """
    _validate(agents, objective, T)
    for ag in agents:
        ag.reset(master_seed)
    fast_ok = isinstance(objective, CoverageObjective) and all(
        a.config.action_count == objective.world.directions for a in agents
    )
    if backend == "auto":
        backend = "kernel" if fast_ok and not record_messages else "reference"
    if backend == "kernel":
        if not fast_ok:
            raise ConfigurationError("kernel backend needs a CoverageObjective")
        trace = _run_kernel(agents, objective, clock, T)
    elif backend == "reference":
        trace = _run_reference(agents, objective, clock, T, record_messages)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    trace.meta["master_seed"] = master_seed
    return trace


# ------------------------------------------------------------ diagnostics


class _Memo:
    """Cached evaluator; diagnostics are instrumentation, not algorithm cost."""

    def __init__(self, objective):
        self.objective = objective
        self.cache = {}

    def __call__(self, actions) -> float:
        key = frozenset(actions)
        v = self.cache.get(key)
        if v is None:
            v = self.cache[key] = self.objective._value(key)
        return v


@dataclass
class RegretReport:
    agent: int
    horizon: int
    action_regret: float
    network_regret: float
    best_action: int
    best_neighborhood: tuple
    discount: float


def network_discount(kappa: float) -> float:
    """(1 - exp(-kappa)) / kappa, with the kappa -> 0 limit of 1."""
    if kappa <= 1e-12:
        return 1.0
    return (1.0 - math.exp(-kappa)) / kappa


def regret_diagnostics(trace: SimTrace, objective: SubmodularObjective, agents: Sequence[Agent], max_candidates: int = 15, kappa: Optional[float] = None):
    """Per-agent action regret and discounted network-design regret, in objective units.

    Action regret compares the played actions with the best fixed action
    against the recorded neighbor contexts.  Network regret compares the
    realised overlap with the best fixed neighborhood of size <= alpha,
    discounted by (1 - e^-kappa)/kappa.
    """
    import itertools

    for ag in agents:
        if len(ag.config.candidates) > max_candidates:
            raise UnsupportedSizeError(
                f"agent {ag.config.id} has {len(ag.config.candidates)} candidates; enumeration limit is {max_candidates}"
            )
    f = _Memo(objective)
    if kappa is None:
        kappa = _memo_curvature(f, objective.ground_set())
    disc = network_discount(kappa)
    T = len(trace)
    reports = []
    for ag in agents:
        i = ag.config.id
        V = ag.config.action_count
        own = [ActionId(i, int(c)) for c in trace.actions[:, i]]
        ctxs = [frozenset(ActionId(int(j), int(trace.actions[t, j])) for j in set(trace.draws[t, i]) if j >= 0) for t in range(T)]

        def gain(a, S):
            return f(S | {a}) - f(S)

        totals = np.zeros(V)
        played = 0.0
        for t in range(T):
            for c in range(V):
                totals[c] += gain(ActionId(i, c), ctxs[t])
            played += gain(own[t], ctxs[t])
        best_a = int(np.argmax(totals))
        a_reg = float(totals[best_a] - played)

        def info(a, S):
            return f({a}) - gain(a, S) if S else 0.0

        realised = sum(info(own[t], ctxs[t]) for t in range(T))
        best_val, best_J = 0.0, ()
        cands = ag.config.candidates
        for size in range(1, ag.config.alpha + 1):
            for J in itertools.combinations(cands, size):
                val = sum(info(own[t], frozenset(ActionId(j, int(trace.actions[t, j])) for j in J)) for t in range(T))
                if val > best_val:
                    best_val, best_J = val, J
        n_reg = disc * best_val - realised if ag.config.alpha > 0 else 0.0
        reports.append(RegretReport(i, T, a_reg, float(n_reg), best_a, tuple(best_J), disc))
    return reports


def _memo_curvature(f, ground):
    class _Wrap:
        evaluations = 0

        def value(self, actions):
            return f(actions)

    return curvature(_Wrap(), ground)
