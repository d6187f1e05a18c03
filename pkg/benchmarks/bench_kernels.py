"""Compare the numba kernels with the numpy fallback.

Runs the same workload in two subprocesses, one with ANACONDA_SIM_NO_JIT=1,
and prints wall time per backend.  The compiled run is timed after a
warm-up call so compilation is excluded.

    python3 benchmarks/bench_kernels.py [--agents 60] [--rounds 417] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from anaconda_sim import backend_name
from anaconda_sim.agent import Agent, AgentConfig, default_reward_scale
from anaconda_sim.clock import TimeModel
from anaconda_sim.harness import ExperimentConfig, candidate_sets, sample_world
from anaconda_sim.objective import ActionId, CoverageObjective
from anaconda_sim.orchestrator import run

n, T, repeat = map(int, sys.argv[1:4])
cfg = ExperimentConfig(agent_count=n)
world, ranges = sample_world(cfg, 1)
f = CoverageObjective(world)
cands = candidate_sets(world.camera_positions, ranges)

def episode(rounds):
    ags = [Agent(AgentConfig(i, 8, cands[i], min(5, len(cands[i])), rounds, default_reward_scale(f, i)), f) for i in range(n)]
    return run(ags, f, TimeModel(0.01, 0.05), rounds, 0, backend="kernel")

def union_eval(k):
    acts = [ActionId(i, i % 8) for i in range(n)]
    for _ in range(k):
        f._value(frozenset(acts))

episode(2); union_eval(1)  # compile / warm caches
out = {"backend": backend_name()}
t0 = time.perf_counter()
for _ in range(repeat):
    tr = episode(T)
out["episode_s"] = (time.perf_counter() - t0) / repeat
out["final_f"] = float(tr.f_values[-1])
t0 = time.perf_counter()
union_eval(200)
out["union_eval_us"] = (time.perf_counter() - t0) / 200 * 1e6
print(json.dumps(out))
"""


def measure(no_jit: bool, args) -> dict:
    env = dict(os.environ)
    env.pop("ANACONDA_SIM_NO_JIT", None)
    if no_jit:
        env["ANACONDA_SIM_NO_JIT"] = "1"
    proc = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(args.agents), str(args.rounds), str(args.repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--agents", type=int, default=60)
    p.add_argument("--rounds", type=int, default=417)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    jit = measure(False, args)
    ref = measure(True, args)
    print(f"{'backend':<8} {'episode [s]':>12} {'f eval [us]':>12} {'final f':>9}")
    for r in (jit, ref):
        print(f"{r['backend']:<8} {r['episode_s']:>12.3f} {r['union_eval_us']:>12.1f} {r['final_f']:>9.0f}")
    print(f"speed-up: episode x{ref['episode_s'] / jit['episode_s']:.1f}, "
          f"f eval x{ref['union_eval_us'] / jit['union_eval_us']:.1f}")
    if jit["final_f"] != ref["final_f"]:
        print("warning: backends disagree on the final objective value")


if __name__ == "__main__":
    main()
