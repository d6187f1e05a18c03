"""Set-function objectives over agents' actions.

An objective is evaluated on any subset of the ground set (all actions of
all agents).  Joint plays hold at most one action per agent, but curvature
and the submodularity audits need arbitrary subsets, so ``value`` accepts
both.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels


class ActionId(NamedTuple):
    agent: int
    choice: int


class PreconditionError(ValueError):
    pass


class UndefinedCurvatureError(ValueError):
    def __init__(self, element):
        super().__init__(f"curvature undefined: singleton value of {element} is 0")
        self.element = element


def check_joint(actions: Iterable[ActionId]) -> frozenset:
    """Validate one-action-per-agent and return the actions as a frozenset."""
    actions = frozenset(actions)
    agents = [a.agent for a in actions]
    if len(agents) != len(set(agents)):
        raise PreconditionError(f"joint action set repeats an agent: {sorted(actions)}")
    return actions


class SubmodularObjective:
    """Base class.  Subclasses implement ``_value(frozenset_of_ActionId)``.

    ``evaluations`` counts every call to :meth:`value`; agents read it to
    report their per-round evaluation budget.
    """

    def __init__(self, action_counts: Sequence[int]):
        self.action_counts = tuple(int(c) for c in action_counts)
        self.evaluations = 0

    @property
    def n_agents(self) -> int:
        return len(self.action_counts)

    def ground_set(self) -> list:
        return [ActionId(i, c) for i, n in enumerate(self.action_counts) for c in range(n)]

    def value(self, actions: Iterable[ActionId]) -> float:
        self.evaluations += 1
        return self._value(frozenset(actions))

    def _value(self, actions: frozenset) -> float:
        raise NotImplementedError


class ModularObjective(SubmodularObjective):
    """Sum of per-action weights; curvature 0."""

    def __init__(self, weights: Sequence[Sequence[float]]):
        super().__init__([len(w) for w in weights])
        self.weights = [list(map(float, w)) for w in weights]

    def _value(self, actions):
        return float(sum(self.weights[a.agent][a.choice] for a in actions))


class TableObjective(SubmodularObjective):
    """Set function given by an explicit table over subsets of a ground set."""

    def __init__(self, action_counts, table):
        super().__init__(action_counts)
        self.table = {frozenset(k): float(v) for k, v in table.items()}

    def _value(self, actions):
        return self.table[actions]


@dataclass
class CoverageWorld:
    width: float
    height: float
    cell_size: float
    camera_positions: np.ndarray
    fov_radius: float
    directions: int

    def __post_init__(self):
        self.camera_positions = np.asarray(self.camera_positions, dtype=float).reshape(-1, 2)
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.directions < 1:
            raise ValueError("directions must be >= 1")
        p = self.camera_positions
        if p.size and (
            p[:, 0].min() < 0 or p[:, 1].min() < 0 or p[:, 0].max() > self.width or p[:, 1].max() > self.height
        ):
            raise ValueError("camera position outside the map")

    @property
    def n_agents(self) -> int:
        return len(self.camera_positions)

    @property
    def n_cols(self) -> int:
        return int(round(self.width / self.cell_size))

    @property
    def n_rows(self) -> int:
        return int(round(self.height / self.cell_size))

    @property
    def area(self) -> float:
        return self.n_cols * self.n_rows * self.cell_size**2

    def fov_center(self, agent: int, choice: int) -> tuple:
        theta = 2.0 * math.pi * choice / self.directions
        x, y = self.camera_positions[agent]
        return (x + self.fov_radius * math.cos(theta), y + self.fov_radius * math.sin(theta))

    def disk_cells(self, cx: float, cy: float) -> np.ndarray:
        """Flat indices (row * n_cols + col) of in-map cells whose centers are within the FOV."""
        s, r = self.cell_size, self.fov_radius
        c0 = max(int(math.floor((cx - r) / s)) - 1, 0)
        c1 = min(int(math.ceil((cx + r) / s)) + 1, self.n_cols)
        r0 = max(int(math.floor((cy - r) / s)) - 1, 0)
        r1 = min(int(math.ceil((cy + r) / s)) + 1, self.n_rows)
        if c0 >= c1 or r0 >= r1:
            return np.empty(0, dtype=np.int32)
        cols = np.arange(c0, c1)
        rows = np.arange(r0, r1)
        dx = (cols + 0.5) * s - cx
        dy = (rows + 0.5) * s - cy
        inside = dy[:, None] ** 2 + dx[None, :] ** 2 <= r * r + 1e-9
        rr, cc = np.nonzero(inside)
        return ((rows[rr]) * self.n_cols + cols[cc]).astype(np.int32)


class CoverageObjective(SubmodularObjective):
    """Covered map area of the selected FOVs, rasterised to grid cells."""

    def __init__(self, world: CoverageWorld):
        super().__init__([world.directions] * world.n_agents)
        self.world = world
        self.cell_area = world.cell_size**2
        self.n_grid = world.n_cols * world.n_rows
        rows = [world.disk_cells(*world.fov_center(i, d)) for i in range(world.n_agents) for d in range(world.directions)]
        width = max((len(r) for r in rows), default=0)
        self.cells = np.zeros((len(rows), max(width, 1)), dtype=np.int32)
        self.ncells = np.zeros(len(rows), dtype=np.int32)
        for g, r in enumerate(rows):
            self.cells[g, : len(r)] = r
            self.ncells[g] = len(r)

    def global_id(self, a: ActionId) -> int:
        return a.agent * self.world.directions + a.choice

    def _value(self, actions):
        if not actions:
            return 0.0
        ids = np.fromiter((self.global_id(a) for a in actions), dtype=np.int64)
        mark = np.zeros(self.n_grid, dtype=np.int64)
        return kernels.union_count(self.cells, self.ncells, ids, len(ids), mark, 1) * self.cell_area

    def singleton_max(self, agent: int) -> float:
        d = self.world.directions
        return float(self.ncells[agent * d : (agent + 1) * d].max()) * self.cell_area


def coverage_value(world: CoverageWorld, actions: Iterable[ActionId]) -> float:
    """Area of in-map cells covered by at least one selected FOV."""
    covered = set()
    for a in actions:
        if not 0 <= a.choice < world.directions:
            raise PreconditionError(f"{a}: choice must be < {world.directions}")
        covered.update(world.disk_cells(*world.fov_center(a.agent, a.choice)).tolist())
    return len(covered) * world.cell_size**2


def marginal_gain(f: SubmodularObjective, a: ActionId, context: Iterable[ActionId]) -> float:
    context = frozenset(context)
    if any(c.agent == a.agent for c in context):
        raise PreconditionError(f"agent {a.agent} already acts in the context")
    return f.value(context | {a}) - f.value(context)


def mutual_information(f: SubmodularObjective, a: ActionId, neighbor_actions: Iterable[ActionId]) -> float:
    """Overlap between ``a`` and the neighbors' actions: f({a}) - f(a | neighbors)."""
    neighbor_actions = frozenset(neighbor_actions)
    if any(c.agent == a.agent for c in neighbor_actions):
        raise PreconditionError(f"agent {a.agent} appears among its own neighbors")
    if not neighbor_actions:
        return 0.0
    return f.value({a}) - marginal_gain(f, a, neighbor_actions)


def curvature(f: SubmodularObjective, ground: Sequence[ActionId]) -> float:
    ground = list(ground)
    if not ground:
        raise ValueError("curvature needs a non-empty ground set")
    full = f.value(ground)
    worst = math.inf
    for v in ground:
        single = f.value([v])
        if single <= 0:
            raise UndefinedCurvatureError(v)
        rest = [u for u in ground if u != v]
        worst = min(worst, (full - f.value(rest)) / single)
    kappa = 1.0 - worst
    if -1e-12 <= kappa < 0:
        kappa = 0.0
    return kappa


@dataclass
class AuditReport:
    trials: int
    violations: int
    worst_violation: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def audit_second_order(f: SubmodularObjective, trials: int, rng_seed: int, tol: float = 1e-9) -> AuditReport:
    """Randomised check of f(s|C) - f(s|A+C) >= f(s|B+C) - f(s|A+B+C) for disjoint A, B, C."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    ground = f.ground_set()
    violations = 0
    worst = 0.0

    def gain(s, S):
        return f.value(S | {s}) - f.value(S)

    for _ in range(trials):
        order = rng.permutation(len(ground))
        s = ground[order[0]]
        labels = rng.integers(0, 4, size=len(ground) - 1)
        rest = [ground[k] for k in order[1:]]
        A = frozenset(x for x, l in zip(rest, labels) if l == 0)
        B = frozenset(x for x, l in zip(rest, labels) if l == 1)
        C = frozenset(x for x, l in zip(rest, labels) if l == 2)
        lhs = gain(s, C) - gain(s, A | C)
        rhs = gain(s, B | C) - gain(s, A | B | C)
        if lhs < rhs - tol:
            violations += 1
            worst = max(worst, rhs - lhs)
    return AuditReport(trials, violations, worst)


def brute_force_optimum(f: SubmodularObjective):
    """Best joint action by enumeration; returns (value, actions)."""
    best, arg = -math.inf, None
    for combo in itertools.product(*(range(n) for n in f.action_counts)):
        acts = [ActionId(i, c) for i, c in enumerate(combo)]
        v = f.value(acts)
        if v > best:
            best, arg = v, acts
    return best, arg
