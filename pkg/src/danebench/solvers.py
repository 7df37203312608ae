"""Single-machine SGD and the local subproblem solvers.

Inner steps sample rows uniformly with replacement from the view. The row
positions for a (machine, round) cell come from their own random stream,
so results do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .errors import ConfigError, ContractViolation
from .ledger import CostLedger
from .objective import Factorization, Loss, SubproblemSpec, exact_minimize
from .schedules import Schedule, step_sizes
from .trace import Trace, rescale_grads


@dataclass(frozen=True)
class Exact:
    pass


@dataclass(frozen=True)
class Sgd:
    T: int
    schedule: Schedule

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError(f"must be >= 1, got {self.T}", "run.T")


@dataclass(frozen=True)
class Svrg:
    T: int
    alpha: float
    average: bool = True

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError(f"must be >= 1, got {self.T}", "run.T")
        if not self.alpha > 0:
            raise ConfigError(f"must be > 0, got {self.alpha}", "run.svrg_alpha")


LocalSolverKind = Exact | Sgd | Svrg


def _ridge_reg(loss: Loss) -> float:
    reg = getattr(loss, "reg", None)
    if reg is None or not loss.quadratic:
        # the kernels hard-code the ridge gradient
        raise ContractViolation(f"stochastic kernels support RidgeLoss only, got {loss!r}")
    return reg


def draw_rows(n: int, steps: int, seed: int, machine: int, round: int) -> np.ndarray:
    if n < 1:
        raise ContractViolation("empty view")
    return rng.stream(seed, rng.INNER, machine, round).integers(0, n, size=steps, dtype=np.int64)


def sgd_run(loss: Loss, view, schedule: Schedule, steps: int, w0, seed: int, *,
            k0: int = 0, round: int = 1, machine: int = 0,
            ledger: CostLedger | None = None) -> tuple[np.ndarray, int]:
    """Run ``steps`` plain SGD steps; step sizes use the global count ``k0 + k``.

    Returns the final iterate and the number of gradient evaluations spent.
    """
    if steps < 1:
        raise ConfigError(f"must be >= 1, got {steps}", "run.T")
    idx = draw_rows(view.X.shape[0], steps, seed, machine, round)
    alphas = step_sizes(schedule, k0, steps, round)
    w = kernels.impl().sgd_steps(view.X, view.y, idx, alphas, np.asarray(w0, dtype=np.float64),
                                 _ridge_reg(loss))
    if ledger is not None:
        ledger.charge(machine, steps)
    return w, steps


def local_solve_sgd(sub: SubproblemSpec, loss: Loss, view, T: int, schedule: Schedule,
                    seed: int, t: int, *, machine: int = 0,
                    ledger: CostLedger | None = None) -> np.ndarray:
    """``T`` SGD steps on the local objective starting from the anchor.

    The step index ``k`` restarts at 0 every round; ``t`` feeds the
    exponential round damping of ``DaneExpDecay``.
    """
    if T < 1:
        raise ConfigError(f"must be >= 1, got {T}", "run.T")
    idx = draw_rows(view.X.shape[0], T, seed, machine, t)
    alphas = step_sizes(schedule, 0, T, t)
    w = kernels.impl().dane_sgd_steps(view.X, view.y, idx, alphas, sub.anchor, _ridge_reg(loss),
                                      sub.shift, sub.mu, sub.anchor)
    if ledger is not None:
        ledger.charge(machine, T)
    return w


def local_solve_svrg(sub: SubproblemSpec, loss: Loss, view, T: int, alpha: float,
                     seed: int, t: int, *, machine: int = 0, average: bool = True,
                     ledger: CostLedger | None = None) -> np.ndarray:
    """One SVRG stage on the local objective with snapshot = anchor.

    The snapshot's full local gradient cancels against ``G_i``, leaving the
    direction ``grad f(w,z) - grad f(anchor,z) + eta*G + mu*(w - anchor)``.
    Each step costs two per-sample gradients. Returns the mean of the ``T``
    inner iterates, or the last one when ``average`` is false.
    """
    if T < 1:
        raise ConfigError(f"must be >= 1, got {T}", "run.T")
    if not alpha > 0:
        raise ConfigError(f"must be > 0, got {alpha}", "run.svrg_alpha")
    idx = draw_rows(view.X.shape[0], T, seed, machine, t)
    w = kernels.impl().svrg_steps(view.X, view.y, idx, float(alpha), sub.anchor, sub.anchor,
                                  _ridge_reg(loss), sub.eta * sub.global_grad, sub.mu,
                                  bool(average))
    if ledger is not None:
        ledger.charge(machine, 2 * T)
    return w


def local_solve(kind: LocalSolverKind, sub: SubproblemSpec, loss: Loss, view, seed: int, t: int,
                *, machine: int = 0, ledger: CostLedger | None = None,
                factorization: Factorization | None = None) -> np.ndarray:
    if isinstance(kind, Exact):
        return exact_minimize(sub, loss, view, ledger, machine, factorization)
    if isinstance(kind, Sgd):
        return local_solve_sgd(sub, loss, view, kind.T, kind.schedule, seed, t,
                               machine=machine, ledger=ledger)
    if isinstance(kind, Svrg):
        return local_solve_svrg(sub, loss, view, kind.T, kind.alpha, seed, t,
                                machine=machine, average=kind.average, ledger=ledger)
    raise TypeError(f"unknown local solver {kind!r}")


def ideal_dist_sgd(trace: Trace, m: int) -> Trace:
    """Single-machine SGD trace re-priced as if its work were split over ``m`` machines."""
    if m < 1:
        raise ConfigError(f"must be >= 1, got {m}", "run.m")
    return rescale_grads(trace, m, "IdealDistSgd")
