"""Step-size rules for the stochastic solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError


class Kind(str, Enum):
    CONSTANT = "Constant"
    INVERSE_DECAY = "InverseDecay"
    DANE_EXP_DECAY = "DaneExpDecay"


@dataclass(frozen=True)
class Schedule:
    """``a0 / (exp(c * t) * (1 + decay * k))`` and its special cases.

    ``Constant`` ignores ``decay`` and ``c``; ``InverseDecay`` ignores ``c``.
    """

    kind: Kind = Kind.INVERSE_DECAY
    a0: float = 0.05
    decay: float = 1e-3
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        # a0 = 0 is accepted so that a frozen iterate can be requested
        if not (self.a0 >= 0 and math.isfinite(self.a0)):
            raise ConfigError(f"must be finite and >= 0, got {self.a0}", "schedule.a0")
        if not (self.decay >= 0 and math.isfinite(self.decay)):
            raise ConfigError(f"must be finite and >= 0, got {self.decay}", "schedule.decay")
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ConfigError(f"must be finite and >= 0, got {self.c}", "schedule.c")

    @classmethod
    def constant(cls, a0: float) -> Schedule:
        return cls(Kind.CONSTANT, a0, 0.0, 0.0)


def step_size(s: Schedule, k: int, t: int = 1) -> float:
    if s.kind is Kind.CONSTANT:
        return s.a0
    if s.kind is Kind.INVERSE_DECAY:
        return s.a0 / (1.0 + s.decay * k)
    return s.a0 / (math.exp(s.c * t) * (1.0 + s.decay * k))


def step_sizes(s: Schedule, k0: int, count: int, t: int = 1) -> np.ndarray:
    """Vector of ``step_size(s, k, t)`` for ``k = k0 .. k0 + count - 1``.

    Elementwise identical to calling :func:`step_size` in a loop.
    """
    if s.kind is Kind.CONSTANT:
        return np.full(count, s.a0)
    k = np.arange(k0, k0 + count, dtype=np.float64)
    denom = 1.0 + s.decay * k
    if s.kind is Kind.DANE_EXP_DECAY:
        denom = math.exp(s.c * t) * denom
    return s.a0 / denom
