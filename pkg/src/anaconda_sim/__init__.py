"""Multi-agent coverage with learned action coordination and neighbor selection."""

from ._accel import backend_name
from .agent import Agent, AgentConfig
from .baseline import build_graph, run_dfssg
from .clock import TimeModel
from .harness import ExperimentConfig, run_sweep
from .objective import ActionId, CoverageObjective, CoverageWorld
from .orchestrator import run

__version__ = "0.1.0"

__all__ = [
    "ActionId",
    "Agent",
    "AgentConfig",
    "CoverageObjective",
    "CoverageWorld",
    "ExperimentConfig",
    "TimeModel",
    "backend_name",
    "build_graph",
    "run",
    "run_dfssg",
    "run_sweep",
]
