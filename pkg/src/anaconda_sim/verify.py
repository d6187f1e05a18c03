"""Self-checks runnable from the command line.

Each suite returns a :class:`SuiteResult` whose checks carry the measured
quantity next to its threshold, so a report shows the margin and not just
a verdict.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .agent import Agent, AgentConfig, default_reward_scale
from .baseline import DirectedCommGraph, run_dfssg, worst_case_time
from .bandit import MwuLearner
from .clock import TimeModel
from .objective import (
    ActionId,
    CoverageObjective,
    CoverageWorld,
    ModularObjective,
    TableObjective,
    audit_second_order,
    brute_force_optimum,
    curvature,
    mutual_information,
)
from .orchestrator import run

DEFAULT_SEED = 0


@dataclass
class Check:
    label: str
    passed: bool
    measured: float
    threshold: float
    relation: str  # how measured must compare with threshold, for the report

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"  [{verdict}] {self.label}: {self.measured:.6g} {self.relation} {self.threshold:.6g}"


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, label, measured, threshold, relation):
        ok = {
            "<=": measured <= threshold,
            ">=": measured >= threshold,
            "==": measured == threshold,
            "<": measured < threshold,
        }[relation]
        self.checks.append(Check(label, bool(ok), float(measured), float(threshold), relation))

    def report(self) -> str:
        head = f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.seconds:.2f} s)"
        return "\n".join([head] + [c.line() for c in self.checks])


# ------------------------------------------------------------ instances


def random_world(rng, n_agents, size=30.0, radius=7.0, directions=4, margin=0.0) -> CoverageWorld:
    pos = rng.uniform(margin, size - margin, size=(n_agents, 2))
    return CoverageWorld(size, size, 1.0, pos, radius, directions)


def saturating_triple() -> TableObjective:
    """Monotone submodular on three one-action agents, yet not 2nd-order submodular.

    Every single element is worth 1, every pair 2, the triple 2: the third
    element's gain collapses only once both others are present.
    """
    s, x, y = ActionId(0, 0), ActionId(1, 0), ActionId(2, 0)
    table = {(): 0.0, (s,): 1.0, (x,): 1.0, (y,): 1.0, (s, x): 2.0, (s, y): 2.0, (x, y): 2.0, (s, x, y): 2.0}
    return TableObjective([1, 1, 1], table)


def path_graph(n: int) -> DirectedCommGraph:
    edges = {(i, i + 1) for i in range(n - 1)} | {(i + 1, i) for i in range(n - 1)}
    return DirectedCommGraph(n, frozenset(edges))


def _all_to_all(f, alpha, T, reward_scale=None):
    n = f.n_agents
    return [
        Agent(
            AgentConfig(
                i,
                f.action_counts[i],
                tuple(j for j in range(n) if j != i),
                alpha,
                T,
                reward_scale or default_reward_scale(f, i),
            ),
            f,
        )
        for i in range(n)
    ]


# --------------------------------------------------------------- suites


def suite_lemma1(seed=DEFAULT_SEED, cases=1000, tol=1e-9) -> SuiteResult:
    """Overlap I(a; J) is non-decreasing and submodular in the neighbor set J."""
    res = SuiteResult("lemma1")
    rng = np.random.default_rng(seed)
    worst_mono = math.inf
    worst_sub = math.inf
    mono_bad = sub_bad = strict = 0
    world_every = 50
    f = None
    for case in range(cases):
        if case % world_every == 0:
            f = CoverageObjective(random_world(rng, 8, directions=int(rng.integers(3, 9))))
        n, D = f.n_agents, f.action_counts[0]
        i = int(rng.integers(n))
        a = ActionId(i, int(rng.integers(D)))
        others = [j for j in range(n) if j != i]
        rng.shuffle(others)
        choice = {j: int(rng.integers(D)) for j in others}
        # J inside K, x outside both
        kx = int(rng.integers(1, len(others)))
        kj = int(rng.integers(0, kx + 1))
        J = frozenset(ActionId(j, choice[j]) for j in others[:kj])
        K = frozenset(ActionId(j, choice[j]) for j in others[:kx])
        x = ActionId(others[kx], choice[others[kx]])

        iJ, iK = mutual_information(f, a, J), mutual_information(f, a, K)
        slack_mono = iK - iJ
        slack_sub = (mutual_information(f, a, J | {x}) - iJ) - (mutual_information(f, a, K | {x}) - iK)
        worst_mono = min(worst_mono, slack_mono)
        worst_sub = min(worst_sub, slack_sub)
        strict += slack_mono > tol or slack_sub > tol
        mono_bad += slack_mono < -tol
        sub_bad += slack_sub < -tol
    res.add("monotonicity violations", mono_bad, 0, "==")
    res.add("submodularity violations", sub_bad, 0, "==")
    res.add("cases with strictly positive slack", strict, 1, ">=")
    res.add("smallest monotonicity slack", worst_mono, -tol, ">=")
    res.add("smallest submodularity slack", worst_sub, -tol, ">=")
    return res


def suite_second_order(seed=DEFAULT_SEED, trials=1000) -> SuiteResult:
    res = SuiteResult("second-order")
    rng = np.random.default_rng(seed)
    f = CoverageObjective(random_world(rng, 6, size=25.0, directions=4))
    rep = audit_second_order(f, trials, seed)
    res.add("coverage violations", rep.violations, 0, "==")
    bad = audit_second_order(saturating_triple(), trials, seed)
    res.add("counterexample violations", bad.violations, 1, ">=")
    return res


def _instrumented_run(seed, n=10, directions=8, alpha=3, T=50, record_messages=False):
    rng = np.random.default_rng(seed)
    f = CoverageObjective(random_world(rng, n, size=40.0, directions=directions))
    agents = _all_to_all(f, alpha, T)
    trace = run(agents, f, TimeModel(0.01, 0.05), T, seed, backend="reference", record_messages=record_messages)
    return f, agents, trace


def suite_prop2(seed=DEFAULT_SEED) -> SuiteResult:
    res = SuiteResult("prop2")
    directions, alpha = 8, 3
    expected = directions + 2 * alpha + 1
    f, _, trace = _instrumented_run(seed, directions=directions, alpha=alpha)
    ev = trace.eval_counts
    res.add("rounds x agents off the expected count", int(np.count_nonzero(ev != expected)), 0, "==")
    res.add("min evaluations per agent-round", ev.min(), expected, "==")
    res.add("max evaluations per agent-round", ev.max(), expected, "==")
    res.add("objective counter total", f.evaluations, ev.size * expected, "==")
    return res


def suite_prop3(seed=DEFAULT_SEED) -> SuiteResult:
    res = SuiteResult("prop3")
    _, agents, trace = _instrumented_run(seed, record_messages=True)
    res.add("max exchange phases per round", trace.exchange_phases.max(), 1, "==")
    res.add("min exchange phases per round", trace.exchange_phases.min(), 1, "==")
    bad_payload = 0
    for t, msgs in enumerate(trace.messages):
        acts = trace.joint_actions(t)
        for m in msgs:
            ok = isinstance(m.payload, ActionId) and m.payload == acts[m.sender]
            bad_payload += not ok
    res.add("payloads other than the sender's own action", bad_payload, 0, "==")
    over_cap = 0
    for msgs in trace.messages:
        per_receiver = {}
        for m in msgs:
            per_receiver[m.receiver] = per_receiver.get(m.receiver, 0) + 1
        over_cap += sum(c > agents[r].config.alpha for r, c in per_receiver.items())
    res.add("receivers above their bandwidth cap", over_cap, 0, "==")
    return res


def mwu_realized_regret(rewards: np.ndarray, seed: int) -> float:
    """Hedge against a fixed reward matrix (T x K); best fixed arm minus realised reward."""
    T, K = rewards.shape
    learner = MwuLearner(K, T)
    rng = np.random.default_rng(seed)
    got = 0.0
    for t in range(T):
        a = learner.sample(rng)
        got += rewards[t, a]
        learner.update(rewards[t])
    return float(rewards.sum(axis=0).max() - got)


def suite_regret(seed=DEFAULT_SEED, runs=5, T=10_000, K=8) -> SuiteResult:
    res = SuiteResult("regret")
    bound = math.sqrt(T * math.log(K) / 2)
    rng = np.random.default_rng(seed)
    for k in range(runs):
        R = rng.uniform(size=(T, K))
        res.add(f"run {k} realised regret", mwu_realized_regret(R, seed + k), bound, "<=")
    return res


def suite_appendix2(tau_c=1.0) -> SuiteResult:
    res = SuiteResult("appendix2")
    for n in (4, 60):
        f = ModularObjective([[1.0]] * n)
        clock = TimeModel(0.01, tau_c)
        tr = run_dfssg(path_graph(n), f, clock)
        res.add(f"path n={n} communication time", tr.comm_time, worst_case_time(n, tau_c), "==")
    return res


def small_instance(seed: int) -> CoverageObjective:
    """4 cameras, 3 headings, every view fully inside the map.

    Cameras share a 40 x 40 box, which yields curvatures spread over
    (0, 1]; tighter packing pins the curvature at 1 and the bands go slack.
    """
    rng = np.random.default_rng(seed)
    return CoverageObjective(random_world(rng, 4, size=60.0, radius=5.0, directions=3, margin=10.0))


def small_instance_case(seed: int, T=10_000):
    """Tail-average coverage for the centralized and decentralized runs, with the oracles."""
    f = small_instance(seed)
    opt, _ = brute_force_optimum(f)
    kappa = curvature(f, f.ground_set())
    out = {"opt": opt, "kappa": kappa}
    for name, alpha in (("centralized", 3), ("decentralized", 0)):
        trace = run(_all_to_all(f, alpha, T), f, TimeModel(0.01, 0.01), T, seed)
        out[name] = float(trace.f_values[T // 2 :].mean())
    return out


def guarantee_bands(kappa: float):
    return 1.0 / (1.0 + kappa), (1.0 - kappa) / (1.0 + kappa - kappa**2)


def suite_theorem1_small(seed=DEFAULT_SEED, instances=10, T=10_000) -> SuiteResult:
    res = SuiteResult("theorem1-small")
    for k in range(instances):
        c = small_instance_case(seed + k, T)
        cen, dec = guarantee_bands(c["kappa"])
        res.add(f"instance {k} centralized / opt", c["centralized"] / c["opt"], cen - 0.05, ">=")
        res.add(f"instance {k} decentralized / opt", c["decentralized"] / c["opt"], dec - 0.05, ">=")
    return res


SUITES = {
    "lemma1": suite_lemma1,
    "prop2": suite_prop2,
    "prop3": suite_prop3,
    "regret": suite_regret,
    "appendix2": lambda seed=DEFAULT_SEED: suite_appendix2(),
    "theorem1-small": suite_theorem1_small,
}


def run_suite(name: str, seed: int = DEFAULT_SEED) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    t0 = time.perf_counter()
    res = SUITES[name](seed=seed)
    res.seconds = time.perf_counter() - t0
    return res
