"""A single ANACONDA agent: action coordination plus neighbor selection.

Evaluation budget per round is |V_i| + 2*alpha_i + 1:

* one evaluation of f({a_i}) as the baseline of the overlap term (or, when
  alpha_i = 0, one evaluation of the empty context);
* two per neighbor draw, f(J_k) and f(J_k + a_i), where J_k is the running
  set of drawn neighbors' actions;
* |V_i| evaluations f(J + a) for the full-information action rewards,
  reusing the cached f(J) from the last draw.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .bandit import ROLE_ACTION, ROLE_NEIGHBOR, Exp3IxBank, MwuLearner, learner_stream
from .objective import ActionId, SubmodularObjective


class ProtocolError(RuntimeError):
    """A drawn neighbor's action was not delivered."""


@dataclass(frozen=True)
class AgentConfig:
    id: int
    action_count: int
    candidates: tuple
    alpha: int
    horizon: int
    reward_scale: float

    def __post_init__(self):
        cands = tuple(int(c) for c in self.candidates)
        if self.id in cands:
            raise ValueError(f"agent {self.id} lists itself as a candidate")
        if len(set(cands)) != len(cands):
            raise ValueError(f"agent {self.id} has duplicate candidates")
        if self.action_count < 1:
            raise ValueError("action_count must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.reward_scale <= 0:
            raise ValueError("reward_scale must be positive")
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "alpha", min(int(self.alpha), len(cands)))


@dataclass
class DrawRecord:
    slot: int
    arm: int
    neighbor: int
    prob: float
    reward: float = float("nan")


@dataclass
class AgentRoundOutput:
    action: ActionId
    neighborhood: frozenset
    eval_count: int
    draws: list = field(default_factory=list)


def default_reward_scale(objective: SubmodularObjective, agent: int) -> float:
    """Largest singleton value over the agent's own actions (a local quantity)."""
    if hasattr(objective, "singleton_max"):
        return objective.singleton_max(agent)
    return max(objective._value(frozenset([ActionId(agent, c)])) for c in range(objective.action_counts[agent]))


def _clamp01(x):
    if x < 0.0:
        return 0.0, True
    if x > 1.0:
        return 1.0, True
    return x, False


class Agent:
    def __init__(self, config: AgentConfig, objective: SubmodularObjective, master_seed: int = 0):
        self.config = config
        self.objective = objective
        self.clamp_count = 0
        self.reset(master_seed)

    def reset(self, master_seed: int = 0):
        """Fresh learners and streams; also the hook for re-joining a network."""
        c = self.config
        self.mwu = MwuLearner(c.action_count, c.horizon)
        self.bank = Exp3IxBank(c.alpha, len(c.candidates), c.horizon)
        self.action_rng = learner_stream(master_seed, c.id, ROLE_ACTION)
        self.neighbor_rngs = [learner_stream(master_seed, c.id, ROLE_NEIGHBOR, k) for k in range(c.alpha)]
        self.current_action = None
        self._ctx = None
        self._round_evals = 0

    # -- evaluation bookkeeping
    def _f(self, actions):
        before = self.objective.evaluations
        v = self.objective.value(actions)
        self._round_evals += self.objective.evaluations - before
        return v

    @property
    def round_evals(self) -> int:
        return self._round_evals

    # -- action coordination
    def select_action(self, rng=None) -> ActionId:
        self._round_evals = 0
        self._ctx = None
        choice = self.mwu.sample(rng if rng is not None else self.action_rng)
        self.current_action = ActionId(self.config.id, choice)
        return self.current_action

    def update_action_learner(self, neighbor_actions: Iterable[ActionId]):
        ctx = frozenset(neighbor_actions)
        if self._ctx is not None and self._ctx[0] == ctx:
            f_ctx = self._ctx[1]
        else:
            f_ctx = self._f(ctx)
        scale = self.config.reward_scale
        rewards = []
        for a in range(self.config.action_count):
            f_ctx_a = self._f(ctx | {ActionId(self.config.id, a)})
            r, clamped = _clamp01((f_ctx_a - f_ctx) / scale)
            self.clamp_count += clamped
            rewards.append(r)
        self.mwu.update(rewards)
        return self

    # -- neighbor selection
    def draw_neighbors(self, rngs=None) -> list:
        rngs = rngs if rngs is not None else self.neighbor_rngs
        draws = []
        for k, learner in enumerate(self.bank.learners):
            arm, q = learner.step(rngs[k])
            draws.append(DrawRecord(k, arm, self.config.candidates[arm], q))
        return draws

    def update_neighbor_learners(self, own_action: ActionId, draws: list, lookup: Callable[[int], ActionId]):
        """Score each draw by the overlap it adds and update its learner.

        Returns the neighborhood (set of agent indices).
        """
        if not draws:
            self._ctx = None
            return frozenset()
        f_a = self._f({own_action})
        ctx = frozenset()
        f_ctx = 0.0
        mi_prev = 0.0
        for d in draws:
            try:
                a_j = lookup(d.neighbor)
            except KeyError as exc:
                raise ProtocolError(f"agent {self.config.id}: no action received from {d.neighbor}") from exc
            if a_j is None:
                raise ProtocolError(f"agent {self.config.id}: no action received from {d.neighbor}")
            ctx = ctx | {a_j}
            f_ctx = self._f(ctx)
            f_ctx_a = self._f(ctx | {own_action})
            mi = f_a - (f_ctx_a - f_ctx)
            r, clamped = _clamp01((mi - mi_prev) / self.config.reward_scale)
            self.clamp_count += clamped
            d.reward = r
            self.bank[d.slot].update(d.arm, d.prob, r)
            mi_prev = mi
        self._ctx = (ctx, f_ctx)
        return frozenset(d.neighbor for d in draws)

    def select_neighbors(self, own_action: ActionId, neighbor_action_lookup, rng=None):
        """Draw alpha neighbors, read their actions via the lookup, update the bank.

        ``neighbor_action_lookup`` is a callable or a mapping from agent index
        to that agent's current action.  Returns ``(neighborhood, draws)``.
        """
        lookup = neighbor_action_lookup
        if not callable(lookup):
            lookup = lookup.__getitem__
        draws = self.draw_neighbors(rng)
        return self.update_neighbor_learners(own_action, draws, lookup), draws

    def play_round(self, lookup) -> AgentRoundOutput:
        """Convenience for a single agent in isolation (no orchestrator)."""
        if not callable(lookup):
            lookup = lookup.__getitem__
        a = self.select_action()
        hood, draws = self.select_neighbors(a, lookup)
        self.update_action_learner(lookup(j) for j in hood)
        return AgentRoundOutput(a, hood, self.round_evals, draws)
