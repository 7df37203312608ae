"""Per-run accounting of gradient evaluations and communication."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CostLedger:
    m: int
    grads_per_machine: list = field(default_factory=list)
    comm_rounds: int = 0
    floats_communicated: int = 0
    exact_solve_events: int = 0

    def __post_init__(self):
        if not self.grads_per_machine:
            self.grads_per_machine = [0] * self.m

    def charge(self, machine: int, grads) -> None:
        if grads < 0:
            raise ValueError("gradient charges are nonnegative")
        self.grads_per_machine[machine] += grads

    def sync(self, d: int) -> None:
        """One barrier: every machine sends a d-vector up and receives one back."""
        self.comm_rounds += 1
        self.floats_communicated += 2 * self.m * d

    @property
    def max_grads_per_machine(self):
        return max(self.grads_per_machine)

    def as_dict(self) -> dict:
        return {
            "grads_per_machine": list(self.grads_per_machine),
            "comm_rounds": self.comm_rounds,
            "floats_communicated": self.floats_communicated,
            "exact_solve_events": self.exact_solve_events,
        }
