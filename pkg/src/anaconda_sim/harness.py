"""Monte-Carlo sweep over neighborhood caps and (tau_f, tau_c) pairs."""

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .agent import Agent, AgentConfig, default_reward_scale
from .baseline import build_graph, run_dfssg
from .clock import TimeModel
from .objective import CoverageObjective, CoverageWorld
from .orchestrator import run


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    width: float = 100.0
    height: float = 100.0
    cell_size: float = 1.0
    agent_count: int = 60
    fov_radius: float = 7.0
    directions: int = 8
    range_low: float = 15.0
    range_high: float = 20.0
    trials: int = 30
    horizon: Optional[int] = None
    time_budget: float = 100.0
    time_step: float = 0.1
    nmax_sweep: list = field(default_factory=lambda: [0, 1, 3, 5])
    tau_pairs: list = field(default_factory=lambda: [[0.01, 0.05], [0.01, 0.01], [0.05, 0.01]])
    include_dfssg: bool = True
    master_seed: int = 0

    def __post_init__(self):
        self.nmax_sweep = [int(v) for v in self.nmax_sweep]
        self.tau_pairs = [tuple(float(x) for x in p) for p in self.tau_pairs]
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why}")

        for name in ("width", "height", "cell_size", "fov_radius", "time_budget", "time_step"):
            if not getattr(self, name) > 0:
                bad(name, "must be positive")
        if self.agent_count < 1:
            bad("agent_count", "must be >= 1")
        if self.directions < 1:
            bad("directions", "must be >= 1")
        if not 0 <= self.range_low <= self.range_high:
            bad("range_low", "need 0 <= range_low <= range_high")
        if self.trials < 1:
            bad("trials", "must be >= 1")
        if self.horizon is not None and self.horizon < 1:
            bad("horizon", "must be >= 1 or null")
        if any(v < 0 for v in self.nmax_sweep):
            bad("nmax_sweep", "entries must be >= 0")
        for p in self.tau_pairs:
            if len(p) != 2 or min(p) <= 0:
                bad("tau_pairs", f"{list(p)} is not a positive (tau_f, tau_c) pair")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        try:
            return cls(**data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["tau_pairs"] = [list(p) for p in self.tau_pairs]
        return d


class VariantKey(NamedTuple):
    algorithm: str  # "anaconda" or "dfssg"
    nmax: Optional[int]
    tau_f: float
    tau_c: float

    @property
    def label(self) -> str:
        taus = f"tf{self.tau_f:g}_tc{self.tau_c:g}"
        return f"anaconda_n{self.nmax}_{taus}" if self.algorithm == "anaconda" else f"dfssg_{taus}"


@dataclass
class TrialTrace:
    """One variant on one trial, as the rows of the trace file."""

    t: np.ndarray
    sim_seconds: np.ndarray
    f_value: np.ndarray
    coverage_fraction: np.ndarray
    comm_messages: np.ndarray
    max_evals: np.ndarray
    flags: dict = field(default_factory=dict)

    def final_coverage(self, tail: float = 0.1) -> float:
        """Mean coverage over the last ``tail`` fraction of events."""
        k = max(1, int(math.ceil(tail * len(self.coverage_fraction))))
        return float(self.coverage_fraction[-k:].mean())


@dataclass
class AggregateCurve:
    time_grid: np.ndarray
    mean_coverage: np.ndarray
    std_coverage: np.ndarray

    def at(self, seconds: float) -> float:
        i = int(np.searchsorted(self.time_grid, seconds + 1e-9, side="right")) - 1
        return float(self.mean_coverage[max(i, 0)])


@dataclass
class SweepResult:
    config: ExperimentConfig
    curves: dict  # VariantKey -> AggregateCurve
    traces: dict  # VariantKey -> list[TrialTrace], one per trial
    worlds: list  # per trial (positions, ranges)

    def finals(self, key) -> np.ndarray:
        """Per-trial converged coverage: tail mean for ANACONDA, completed value for DFS-SG."""
        if key.algorithm == "dfssg":
            return np.array([tr.coverage_fraction[-1] for tr in self.traces[key]])
        return np.array([tr.final_coverage() for tr in self.traces[key]])

    def first_coverage(self, key) -> np.ndarray:
        return np.array([tr.coverage_fraction[0] for tr in self.traces[key]])

    def disconnection_rate(self) -> float:
        keys = [k for k in self.traces if k.algorithm == "dfssg"]
        if not keys:
            return 0.0
        return float(np.mean([tr.flags.get("disconnected", False) for tr in self.traces[keys[0]]]))


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=(trial,)).generate_state(1)[0])


def sample_world(config: ExperimentConfig, seed: int):
    """Uniform camera positions on the map and uniform communication ranges."""
    rng = np.random.default_rng(seed)
    pos = np.column_stack(
        [rng.uniform(0, config.width, config.agent_count), rng.uniform(0, config.height, config.agent_count)]
    )
    ranges = rng.uniform(config.range_low, config.range_high, config.agent_count)
    world = CoverageWorld(config.width, config.height, config.cell_size, pos, config.fov_radius, config.directions)
    return world, ranges


def candidate_sets(positions, ranges) -> list:
    """M_i: agents within agent i's communication range."""
    g = build_graph(positions, ranges)
    return [tuple(g.in_neighbors(i)) for i in range(g.n)]


def anaconda_horizon(config: ExperimentConfig, alphas, tau_f, tau_c) -> int:
    if config.horizon is not None:
        return config.horizon
    per_round = tau_f * (config.directions + 2 * max(alphas, default=0) + 1) + tau_c
    return max(1, int(math.ceil(config.time_budget / per_round - 1e-9)))


def _anaconda_trace(objective, cands, nmax, tau_f, tau_c, config, seed) -> TrialTrace:
    n = objective.n_agents
    alphas = [min(nmax, len(c)) for c in cands]
    T = anaconda_horizon(config, alphas, tau_f, tau_c)
    agents = [
        Agent(AgentConfig(i, config.directions, cands[i], alphas[i], T, default_reward_scale(objective, i)), objective)
        for i in range(n)
    ]
    tr = run(agents, objective, TimeModel(tau_f, tau_c), T, seed)
    area = objective.world.area
    return TrialTrace(
        t=np.arange(1, T + 1),
        sim_seconds=tr.sim_time,
        f_value=tr.f_values,
        coverage_fraction=tr.f_values / area,
        comm_messages=tr.comm_messages,
        max_evals=tr.eval_counts.max(axis=1),
        flags={"clamps": tr.clamp_count, "horizon": T},
    )


def _dfssg_trace(objective, graph, tau_f, tau_c) -> TrialTrace:
    tr = run_dfssg(graph, objective, TimeModel(tau_f, tau_c))
    order_pos = {}
    for plan in tr.plans:
        for k, a in enumerate(plan.order):
            order_pos[a] = (k, plan.hop_distances[k - 1] if k else 0)
    msgs = np.array([order_pos[int(a)][0] * order_pos[int(a)][1] for a in tr.commit_agents], dtype=np.int64)
    evals = np.array([objective.action_counts[int(a)] for a in tr.commit_agents], dtype=np.int64)
    return TrialTrace(
        t=np.arange(1, len(tr.f_values) + 1),
        sim_seconds=tr.commit_times,
        f_value=tr.f_values,
        coverage_fraction=tr.f_values / objective.world.area,
        comm_messages=msgs,
        max_evals=evals,
        flags=dict(tr.flags),
    )


def run_trial(config: ExperimentConfig, trial: int) -> dict:
    seed = trial_seed(config.master_seed, trial)
    world, ranges = sample_world(config, seed)
    objective = CoverageObjective(world)
    cands = candidate_sets(world.camera_positions, ranges)
    graph = build_graph(world.camera_positions, ranges)
    out = {}
    for tau_f, tau_c in config.tau_pairs:
        for nmax in config.nmax_sweep:
            out[VariantKey("anaconda", nmax, tau_f, tau_c)] = _anaconda_trace(
                objective, cands, nmax, tau_f, tau_c, config, seed
            )
        if config.include_dfssg:
            out[VariantKey("dfssg", None, tau_f, tau_c)] = _dfssg_trace(objective, graph, tau_f, tau_c)
    return {"traces": out, "world": (world.camera_positions.copy(), ranges.copy())}


def locf(times, values, grid) -> np.ndarray:
    """Last observation carried forward onto ``grid``; 0 before the first event."""
    idx = np.searchsorted(times, grid + 1e-12, side="right") - 1
    out = np.where(idx >= 0, np.asarray(values)[np.maximum(idx, 0)], 0.0)
    return out


def run_sweep(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Every variant on every sampled world, aggregated on a common time grid.

    The grid runs from 0 to the larger of ``time_budget`` and the slowest
    DFS-SG completion, so both algorithms' converged values appear on it.
    """
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda k: run_trial(config, k), range(config.trials)))
    else:
        results = [run_trial(config, k) for k in range(config.trials)]

    keys = list(results[0]["traces"])
    traces = {k: [r["traces"][k] for r in results] for k in keys}
    end = config.time_budget
    for k in keys:
        if k.algorithm == "dfssg":
            end = max(end, max(tr.sim_seconds[-1] for tr in traces[k]))
    steps = int(math.ceil(end / config.time_step - 1e-9))
    grid = np.round(np.arange(steps + 1) * config.time_step, 10)
    curves = {}
    for k in keys:
        stack = np.array([locf(tr.sim_seconds, tr.coverage_fraction, grid) for tr in traces[k]])
        curves[k] = AggregateCurve(grid, stack.mean(axis=0), stack.std(axis=0))
    return SweepResult(config, curves, traces, [r["world"] for r in results])
