"""Simulated decision-time accounting in units of evaluations and transmissions."""

from dataclasses import dataclass, field


@dataclass
class TimeModel:
    """Accumulates simulated seconds.

    ``tau_f`` is the cost of one objective evaluation and ``tau_c`` the cost
    of transmitting one action over one hop.
    """

    tau_f: float
    tau_c: float
    elapsed: float = 0.0
    comm_time: float = 0.0
    compute_time: float = 0.0
    charges: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.tau_f <= 0 or self.tau_c <= 0:
            raise ValueError("tau_f and tau_c must be positive")

    def _add(self, compute, comm):
        self.compute_time += compute
        self.comm_time += comm
        self.elapsed += compute + comm
        self.charges.append(compute + comm)
        return self

    def charge_anaconda_round(self, per_agent_evals, comm_rounds: int = 1) -> "TimeModel":
        # agents compute in parallel; one multi-channel exchange per round
        return self._add(self.tau_f * max(per_agent_evals), self.tau_c * comm_rounds)

    def charge_dfssg_step(self, evals: int, message_size: int, hops: int) -> "TimeModel":
        if message_size < 0 or hops < 0:
            raise ValueError("message_size and hops must be >= 0")
        return self._add(self.tau_f * evals, self.tau_c * message_size * hops)

    def anaconda_round_cost(self, per_agent_evals, comm_rounds: int = 1) -> float:
        return self.tau_f * max(per_agent_evals) + self.tau_c * comm_rounds

    def fork(self) -> "TimeModel":
        return TimeModel(self.tau_f, self.tau_c)
