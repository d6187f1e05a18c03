"""Sequential greedy executed along a depth-first ordering (DFS-SG).

Each agent in the ordering greedily picks the action with the largest
marginal gain given every action committed before it, then forwards the
whole committed list to the next agent over the shortest directed path.
Transfer time is ``tau_c * (actions carried) * hops``.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .clock import TimeModel
from .objective import ActionId, SubmodularObjective


@dataclass(frozen=True)
class DirectedCommGraph:
    """Edge ``(j, i)`` means agent ``i`` can receive from agent ``j``."""

    n: int
    edges: frozenset

    def in_neighbors(self, i) -> list:
        return sorted(j for (j, k) in self.edges if k == i)

    def out_neighbors(self, j) -> list:
        return sorted(k for (s, k) in self.edges if s == j)

    def undirected_neighbors(self, i) -> list:
        return sorted({k for (s, k) in self.edges if s == i} | {s for (s, k) in self.edges if k == i})


@dataclass
class DfsPlan:
    order: list
    hop_distances: list  # hop_distances[k] = d(order[k], order[k + 1])
    fallback: list  # True where no directed path existed


def build_graph(positions, ranges) -> DirectedCommGraph:
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    ranges = np.asarray(ranges, dtype=float)
    if len(pos) != len(ranges):
        raise ValueError("positions and ranges differ in length")
    dist = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
    edges = frozenset(
        (j, i) for i in range(len(pos)) for j in range(len(pos)) if j != i and dist[j, i] <= ranges[i]
    )
    return DirectedCommGraph(len(pos), edges)


def _bfs(adj, src, dst):
    if src == dst:
        return 0
    seen = {src}
    q = deque([(src, 0)])
    while q:
        u, d = q.popleft()
        for v in adj[u]:
            if v == dst:
                return d + 1
            if v not in seen:
                seen.add(v)
                q.append((v, d + 1))
    return None


def plan_dfs(graph: DirectedCommGraph) -> list:
    """One plan per weakly connected component, rooted at its lowest index."""
    und = [graph.undirected_neighbors(i) for i in range(graph.n)]
    out = [graph.out_neighbors(i) for i in range(graph.n)]
    visited = [False] * graph.n
    plans = []
    for root in range(graph.n):
        if visited[root]:
            continue
        order = []
        stack = [root]
        while stack:
            u = stack.pop()
            if visited[u]:
                continue
            visited[u] = True
            order.append(u)
            stack.extend(v for v in reversed(und[u]) if not visited[v])
        hops, fallback = [], []
        for a, b in zip(order, order[1:]):
            d = _bfs(out, a, b)
            fallback.append(d is None)
            hops.append(d if d is not None else _bfs(und, a, b))
        plans.append(DfsPlan(order, hops, fallback))
    return plans


@dataclass
class DfsSgTrace:
    commit_agents: np.ndarray
    commit_choices: np.ndarray
    commit_times: np.ndarray
    f_values: np.ndarray
    plans: list
    total_time: float
    comm_time: float
    compute_time: float
    evaluations: int
    flags: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.commit_times

    @property
    def final_actions(self) -> list:
        return sorted(ActionId(int(a), int(c)) for a, c in zip(self.commit_agents, self.commit_choices))

    @property
    def final_value(self) -> float:
        return float(self.f_values[-1]) if len(self.f_values) else 0.0


def run_dfssg(graph: DirectedCommGraph, objective: SubmodularObjective, clock: TimeModel) -> DfsSgTrace:
    """Greedy in DFS order; components (if any) proceed in parallel."""
    if graph.n != objective.n_agents:
        raise ValueError("graph and objective disagree on the number of agents")
    plans = plan_dfs(graph)
    events = []  # (time, component, position, agent, choice)
    comp_clocks = []
    evals = 0
    for ci, plan in enumerate(plans):
        tm = clock.fork()
        committed = frozenset()
        f_committed = 0.0
        for k, agent in enumerate(plan.order):
            hops = plan.hop_distances[k - 1] if k else 0
            best_c, best_gain, best_v = 0, -np.inf, f_committed
            for c in range(objective.action_counts[agent]):
                v = objective.value(committed | {ActionId(agent, c)})
                evals += 1
                if v - f_committed > best_gain:
                    best_c, best_gain, best_v = c, v - f_committed, v
            committed = committed | {ActionId(agent, best_c)}
            f_committed = best_v
            tm.charge_dfssg_step(objective.action_counts[agent], k, hops)
            events.append((tm.elapsed, ci, k, agent, best_c))
        comp_clocks.append(tm)

    events.sort(key=lambda e: (e[0], e[1], e[2]))
    chosen = []
    f_values = np.zeros(len(events))
    for idx, (_, _, _, agent, c) in enumerate(events):
        chosen.append(ActionId(agent, c))
        f_values[idx] = objective._value(frozenset(chosen))

    longest = max(comp_clocks, key=lambda tm: tm.elapsed) if comp_clocks else clock.fork()
    clock.compute_time += longest.compute_time
    clock.comm_time += longest.comm_time
    clock.elapsed += longest.elapsed
    clock.charges.extend(longest.charges)

    return DfsSgTrace(
        commit_agents=np.array([e[3] for e in events], dtype=np.int64),
        commit_choices=np.array([e[4] for e in events], dtype=np.int64),
        commit_times=np.array([e[0] for e in events]),
        f_values=f_values,
        plans=plans,
        total_time=longest.elapsed,
        comm_time=longest.comm_time,
        compute_time=longest.compute_time,
        evaluations=evals,
        flags={
            "components": len(plans),
            "disconnected": len(plans) > 1,
            "fallback_hops": any(any(p.fallback) for p in plans),
        },
    )


def worst_case_time(n: int, tau_c: float) -> float:
    """Spanning-walk communication time tau_c * n (n - 1) / 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return tau_c * n * (n - 1) / 2
