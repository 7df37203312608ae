"""Per-sample losses, empirical gradients and the DANE local subproblem.

The empirical risk of a view (a :class:`~danebench.data.Dataset` or
:class:`~danebench.data.Shard`) is the mean of the per-sample loss over its
rows. The ridge penalty is part of every per-sample loss, so each local
risk is strongly convex on its own.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import ConfigError, ContractViolation, NumericalError, UnsupportedError
from .ledger import CostLedger

DENSE_LIMIT = 2000
SOLVE_RTOL = 1e-10


class Loss:
    """Interface for per-sample losses ``f(w, (x, y))``.

    Subclasses provide ``value`` and ``grad`` for a single sample and
    ``mean_value`` / ``mean_grad`` over a feature matrix. Losses that are
    quadratic in ``w`` also provide ``hessian`` and enable the exact solver.
    """

    quadratic = False

    def value(self, w, x, y) -> float:
        raise NotImplementedError

    def grad(self, w, x, y) -> np.ndarray:
        raise NotImplementedError

    def mean_value(self, w, X, y) -> float:
        return float(np.mean([self.value(w, xi, yi) for xi, yi in zip(X, y)]))

    def mean_grad(self, w, X, y) -> np.ndarray:
        return np.mean([self.grad(w, xi, yi) for xi, yi in zip(X, y)], axis=0)

    def hessian(self, X) -> np.ndarray:
        raise UnsupportedError(f"{type(self).__name__} has no constant Hessian")


class RidgeLoss(Loss):
    """``(<x, w> - y)**2 + reg * ||w||**2``."""

    quadratic = True

    def __init__(self, reg: float = 0.005):
        if not reg >= 0:
            raise ConfigError(f"must be >= 0, got {reg}", "problem.reg")
        self.reg = float(reg)

    def __repr__(self):
        return f"RidgeLoss(reg={self.reg!r})"

    def value(self, w, x, y):
        r = x @ w - y
        return float(r * r + self.reg * (w @ w))

    def grad(self, w, x, y):
        return 2.0 * (x @ w - y) * x + 2.0 * self.reg * w

    def mean_value(self, w, X, y):
        r = X @ w - y
        return float(r @ r / X.shape[0] + self.reg * (w @ w))

    def mean_grad(self, w, X, y):
        r = X @ w - y
        return (2.0 / X.shape[0]) * (X.T @ r) + 2.0 * self.reg * w

    def hessian(self, X):
        d = X.shape[1]
        return (2.0 / X.shape[0]) * (X.T @ X) + 2.0 * self.reg * np.eye(d)


def _check_dim(w, d):
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (d,):
        raise ContractViolation(f"expected a vector of length {d}, got shape {w.shape}")
    return w


def loss_sample(loss: Loss, w, z) -> float:
    x, y = z
    return loss.value(_check_dim(w, len(x)), np.asarray(x, dtype=np.float64), float(y))


def grad_sample(loss: Loss, w, z) -> np.ndarray:
    x, y = z
    return loss.grad(_check_dim(w, len(x)), np.asarray(x, dtype=np.float64), float(y))


def risk(loss: Loss, w, view) -> float:
    """Empirical risk (mean per-sample loss) of ``w`` on ``view``."""
    if view.X.shape[0] == 0:
        raise ContractViolation("empty view")
    return loss.mean_value(_check_dim(w, view.X.shape[1]), view.X, view.y)


def full_grad(loss: Loss, w, view, ledger: CostLedger | None = None, machine: int = 0) -> np.ndarray:
    """Mean per-sample gradient over ``view``; charges ``len(view)`` evaluations."""
    if view.X.shape[0] == 0:
        raise ContractViolation("empty view")
    g = loss.mean_grad(_check_dim(w, view.X.shape[1]), view.X, view.y)
    if ledger is not None:
        ledger.charge(machine, view.X.shape[0])
    return g


class SubproblemSpec:
    """Local objective ``h(w) = phi_i(w) - (G_i - eta*G)^T w + mu/2 ||w - anchor||^2``."""

    __slots__ = ("anchor", "local_grad", "global_grad", "eta", "mu", "shift")

    def __init__(self, anchor, local_grad, global_grad, eta=1.0, mu=0.0):
        anchor = np.asarray(anchor, dtype=np.float64)
        d = anchor.shape[0]
        self.anchor = anchor
        self.local_grad = _check_dim(local_grad, d)
        self.global_grad = _check_dim(global_grad, d)
        if not eta > 0:
            raise ConfigError(f"must be > 0, got {eta}", "run.eta")
        if not mu >= 0:
            raise ConfigError(f"must be >= 0, got {mu}", "run.mu")
        self.eta = float(eta)
        self.mu = float(mu)
        # linear coefficient G_i - eta*G
        self.shift = self.local_grad - self.eta * self.global_grad

    @property
    def d(self) -> int:
        return self.anchor.shape[0]


def build_subproblem(anchor, G_i, G, eta, mu, all_local_grads=None) -> SubproblemSpec:
    """Assemble a subproblem; if every machine's gradient is given, check G is their mean."""
    if all_local_grads is not None:
        mean = np.mean(np.asarray(all_local_grads, dtype=np.float64), axis=0)
        if not np.allclose(mean, G, rtol=1e-12, atol=1e-12 * max(1.0, float(np.abs(G).max(initial=0)))):
            raise ContractViolation("global gradient is not the mean of the local gradients")
    return SubproblemSpec(anchor, G_i, G, eta, mu)


def subproblem_value(sub: SubproblemSpec, loss: Loss, w, view) -> float:
    w = _check_dim(w, sub.d)
    diff = w - sub.anchor
    return risk(loss, w, view) - sub.shift @ w + 0.5 * sub.mu * (diff @ diff)


def subproblem_grad(sub: SubproblemSpec, loss: Loss, w, view) -> np.ndarray:
    """Exact gradient of the local objective on ``view``; free of charge."""
    w = _check_dim(w, sub.d)
    return loss.mean_grad(w, view.X, view.y) - sub.shift + sub.mu * (w - sub.anchor)


def subproblem_grad_sample(sub: SubproblemSpec, loss: Loss, w, z) -> np.ndarray:
    """Stochastic gradient ``grad f(w,z) - G_i + eta*G + mu*(w - anchor)``."""
    w = _check_dim(w, sub.d)
    return grad_sample(loss, w, z) - sub.local_grad + sub.eta * sub.global_grad + sub.mu * (w - sub.anchor)


def subproblem_sample_value(sub: SubproblemSpec, loss: Loss, w, z) -> float:
    """The per-sample term whose mean over the shard is the local objective."""
    w = _check_dim(w, sub.d)
    diff = w - sub.anchor
    return loss_sample(loss, w, z) - sub.shift @ w + 0.5 * sub.mu * (diff @ diff)


class Factorization:
    """Reusable solver for ``(H_view + mu*I) w = rhs`` on a fixed view."""

    def __init__(self, loss: Loss, view, mu: float):
        if not loss.quadratic:
            raise UnsupportedError("exact local solves need a quadratic loss")
        self.X = view.X
        self.n, self.d = view.X.shape
        self.mu = float(mu)
        self.reg = loss.reg
        if self.d <= DENSE_LIMIT:
            H = loss.hessian(view.X) + self.mu * np.eye(self.d)
            try:
                self._chol = scipy.linalg.cho_factor(H, lower=False, check_finite=True)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    "local Hessian is not positive definite; use mu > 0 or reg > 0") from exc
            self._op = None
        else:
            self._chol = None
            diag = 2.0 * self.reg + self.mu
            if diag <= 0:
                raise NumericalError("local Hessian may be singular; use mu > 0 or reg > 0")
            X = self.X
            scale = 2.0 / self.n
            self._op = scipy.sparse.linalg.LinearOperator(
                (self.d, self.d), matvec=lambda v: scale * (X.T @ (X @ v)) + diag * v,
                dtype=np.float64)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._chol is not None:
            return scipy.linalg.cho_solve(self._chol, rhs)
        w, info = scipy.sparse.linalg.cg(self._op, rhs, rtol=SOLVE_RTOL * 1e-2, atol=0.0,
                                         maxiter=10 * self.d)
        if info != 0:
            raise NumericalError(f"conjugate-gradient solve did not converge (info={info})")
        return w


def exact_minimize(sub: SubproblemSpec, loss: Loss, view, ledger: CostLedger | None = None,
                   machine: int = 0, factorization: Factorization | None = None) -> np.ndarray:
    """Minimize the local objective exactly by a linear solve.

    The stationarity condition is
    ``(2/n X^T X + 2 reg I + mu I) w = (2/n) X^T y + G_i - eta*G + mu*anchor``.
    """
    if not loss.quadratic:
        raise UnsupportedError("exact local solves need a quadratic loss")
    fac = factorization or Factorization(loss, view, sub.mu)
    rhs = (2.0 / fac.n) * (view.X.T @ view.y) + sub.shift + sub.mu * sub.anchor
    w = fac.solve(rhs)
    if not np.all(np.isfinite(w)):
        raise NumericalError("exact local solve produced non-finite values; use mu > 0",
                             machine=machine)
    if ledger is not None:
        ledger.charge(machine, fac.n)
        ledger.exact_solve_events += 1
    return w


def hessian_spectrum(loss: Loss, view) -> tuple[float, float]:
    """(smallest, largest) eigenvalue of the empirical Hessian; a diagnostic."""
    ev = np.linalg.eigvalsh(loss.hessian(view.X))
    return float(ev[0]), float(ev[-1])
