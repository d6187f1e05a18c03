"""Multiplicative-weights (full information) and EXP3-IX (bandit) learners.

Both keep log-weights; probabilities are formed with max-subtraction so
long horizons do not overflow.  Sampling consumes exactly one uniform from
the supplied generator per draw, which keeps object-level runs and the
fused kernel in lockstep.
"""

import math

import numpy as np

from . import kernels

ROLE_ACTION = 0
ROLE_NEIGHBOR = 1


def learner_stream(master_seed: int, agent: int, role: int, k: int = 0) -> np.random.Generator:
    """Independent generator for one learner, keyed by (agent, role, k)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(agent, role, k)))


def _check_reward(r, arm):
    if not (0.0 <= r <= 1.0):
        raise ValueError(f"reward {r!r} for arm {arm} outside [0, 1]")


class MwuLearner:
    """Hedge over ``arm_count`` arms with rate sqrt(8 ln K / T)."""

    def __init__(self, arm_count: int, horizon: int):
        if arm_count < 1 or horizon < 1:
            raise ValueError("arm_count and horizon must be >= 1")
        self.arm_count = arm_count
        self.horizon = horizon
        self.eta = math.sqrt(8.0 * math.log(arm_count) / horizon)
        self.log_weights = np.zeros(arm_count)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def distribution(self) -> np.ndarray:
        return kernels.distribution(self.log_weights, self.arm_count, np.empty(self.arm_count))

    def sample(self, rng: np.random.Generator) -> int:
        i, _ = kernels.sample_index(self.log_weights, self.arm_count, rng.random())
        return int(i)

    def update(self, rewards) -> "MwuLearner":
        rewards = np.asarray(rewards, dtype=float)
        if rewards.shape != (self.arm_count,):
            raise ValueError(f"expected {self.arm_count} rewards, got shape {rewards.shape}")
        for a, r in enumerate(rewards):
            _check_reward(r, a)
        kernels.mwu_update(self.log_weights, rewards, self.eta)
        return self


class Exp3IxLearner:
    """EXP3 with implicit exploration; rate sqrt(2 ln K / (K T)), gamma = rate / 2."""

    def __init__(self, arm_count: int, horizon: int):
        if arm_count < 1 or horizon < 1:
            raise ValueError("arm_count and horizon must be >= 1")
        self.arm_count = arm_count
        self.horizon = horizon
        self.eta = math.sqrt(2.0 * math.log(arm_count) / (arm_count * horizon))
        self.gamma = self.eta / 2.0
        self.log_weights = np.zeros(arm_count)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def distribution(self) -> np.ndarray:
        return kernels.distribution(self.log_weights, self.arm_count, np.empty(self.arm_count))

    def step(self, rng: np.random.Generator):
        """Draw an arm; returns ``(arm, probability of that arm)``."""
        i, q = kernels.sample_index(self.log_weights, self.arm_count, rng.random())
        return int(i), float(q)

    def update(self, chosen: int, q_chosen: float, reward: float) -> float:
        """Apply the IX estimate; returns the chosen arm's estimated reward."""
        _check_reward(reward, chosen)
        if not (0.0 < q_chosen <= 1.0):
            raise ValueError(f"probability {q_chosen!r} outside (0, 1]")
        return float(
            kernels.exp3ix_update(self.log_weights, self.arm_count, chosen, q_chosen, reward, self.eta, self.gamma)
        )


class Exp3IxBank:
    """``alpha`` independent EXP3-IX learners, one per neighbor slot."""

    def __init__(self, alpha: int, arm_count: int, horizon: int):
        self.learners = [Exp3IxLearner(arm_count, horizon) for _ in range(alpha)] if arm_count else []

    def __len__(self):
        return len(self.learners)

    def __getitem__(self, k) -> Exp3IxLearner:
        return self.learners[k]
