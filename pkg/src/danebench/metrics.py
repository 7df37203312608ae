"""Ground-truth optimum, suboptimality, population error and trace summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import Dataset, SyntheticSpec, generate_holdout_chunks
from .errors import NumericalError, UnsupportedError
from .objective import Loss, full_grad, risk
from .trace import SUBOPT_FLOOR, Trace

DEFAULT_HOLDOUT = 100_000


def solve_optimum(dataset: Dataset, loss: Loss) -> tuple[np.ndarray, float]:
    """Minimizer of the empirical risk via the normal equations."""
    if not loss.quadratic:
        raise UnsupportedError("closed-form optimum needs a quadratic loss")
    H = loss.hessian(dataset.X)
    rhs = (2.0 / dataset.n) * (dataset.X.T @ dataset.y)
    try:
        w = scipy.linalg.solve(H, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise NumericalError("normal equations are singular; increase reg") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("normal equations are singular; increase reg")
    return w, risk(loss, w, dataset)


class HoldoutStats:
    """Summed second moments of a holdout set; enough to evaluate any ridge risk.

    For ridge loss the mean holdout loss of ``w`` is
    ``w^T Sxx w - 2 w^T sxy + syy + reg ||w||^2``, so the rows themselves need
    not be kept.
    """

    def __init__(self, d: int):
        self.size = 0
        self.Sxx = np.zeros((d, d))
        self.sxy = np.zeros(d)
        self.syy = 0.0

    def add(self, X, y) -> None:
        self.Sxx += X.T @ X
        self.sxy += X.T @ y
        self.syy += float(y @ y)
        self.size += X.shape[0]

    @classmethod
    def of(cls, dataset: Dataset) -> HoldoutStats:
        s = cls(dataset.d)
        s.add(dataset.X, dataset.y)
        return s

    @classmethod
    def draw(cls, spec: SyntheticSpec, size: int) -> HoldoutStats:
        s = cls(spec.d)
        for X, y in generate_holdout_chunks(spec, size):
            s.add(X, y)
        return s

    def mean_ridge_loss(self, w, reg: float) -> float:
        quad = w @ (self.Sxx @ w) - 2.0 * (w @ self.sxy) + self.syy
        return float(quad / self.size + reg * (w @ w))


@dataclass
class EvalContext:
    w_opt: np.ndarray
    f_opt: float
    train: Dataset
    loss: Loss
    holdout: HoldoutStats | Dataset | None = None

    def __post_init__(self):
        if self.loss.quadratic:
            # phi(w) - phi(w_opt) = (w - w_opt)^T (H/2) (w - w_opt) exactly
            self._half_hessian = 0.5 * self.loss.hessian(self.train.X)
        else:
            self._half_hessian = None

    @classmethod
    def build(cls, train: Dataset, loss: Loss, spec: SyntheticSpec | None = None,
              holdout_size: int = DEFAULT_HOLDOUT) -> EvalContext:
        w_opt, f_opt = solve_optimum(train, loss)
        hold = HoldoutStats.draw(spec, holdout_size) if spec is not None else None
        return cls(w_opt, f_opt, train, loss, hold)

    def gradient_residual(self) -> float:
        return float(np.linalg.norm(full_grad(self.loss, self.w_opt, self.train)))


def suboptimality(w, ctx: EvalContext) -> float:
    w = np.asarray(w, dtype=np.float64)
    if ctx._half_hessian is not None:
        e = w - ctx.w_opt
        return float(e @ (ctx._half_hessian @ e))
    return risk(ctx.loss, w, ctx.train) - ctx.f_opt


def log10_suboptimality(w, ctx: EvalContext) -> float:
    return math.log10(max(suboptimality(w, ctx), SUBOPT_FLOOR))


def population_error(w, ctx: EvalContext) -> float:
    w = np.asarray(w, dtype=np.float64)
    h = ctx.holdout
    if h is None:
        return math.nan
    if isinstance(h, HoldoutStats):
        return h.mean_ridge_loss(w, ctx.loss.reg)
    return risk(ctx.loss, w, h)


def rounds_to_target(trace: Trace, target_log10: float = -2.5) -> int | None:
    for p in trace.points:
        if p.log10_subopt <= target_log10:
            return p.round
    return None


def grads_to_target(trace: Trace, target_log10: float = -2.5):
    for p in trace.points:
        if p.log10_subopt <= target_log10:
            return p.max_grads_per_machine
    return None


def value_at_budget(trace: Trace, budget) -> float:
    """log10 suboptimality of the last trace point whose cost is within ``budget``."""
    best = None
    for p in trace.points:
        if p.max_grads_per_machine <= budget:
            best = p.log10_subopt
    if best is None:
        raise ValueError(f"no trace point within budget {budget}")
    return best


def plateau_point(trace: Trace, min_gain: float = 0.05, patience: int = 3):
    """First point after which ``patience`` consecutive rounds each gain less than
    ``min_gain`` in log10 suboptimality; the last point if that never happens."""
    pts = trace.points
    for i in range(len(pts) - patience):
        if all(pts[j].log10_subopt - pts[j + 1].log10_subopt < min_gain
               for j in range(i, i + patience)):
            return pts[i]
    return pts[-1]
