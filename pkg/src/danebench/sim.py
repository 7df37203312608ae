"""Synchronous round simulation of distributed SGD and the DANE family.

Machines are simulated in-process. A round is a barrier: per-machine work
may run on a thread pool, but results are always reduced in machine order,
so the output does not depend on the number of workers. Communication is
counted, not performed: each synchronization moves one d-vector up and one
down per machine.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from . import defaults, kernels
from .data import Dataset, Shard, SyntheticSpec, generate_synthetic, partition, sample_subset
from .errors import ConfigError, NumericalError, UnsupportedError
from .ledger import CostLedger
from .metrics import EvalContext, HoldoutStats, population_error, solve_optimum, suboptimality
from .objective import Factorization, Loss, RidgeLoss, build_subproblem, full_grad
from .schedules import Schedule
from .solvers import Exact, Sgd, Svrg, ideal_dist_sgd, local_solve, sgd_run
from .trace import LOG_BASE, SUBOPT_FLOOR, Trace, TracePoint, log10_floor

MONOTONE_TOL = 1e-9


class Algorithm(str, Enum):
    SGD = "Sgd"
    IDEAL_DIST_SGD = "IdealDistSgd"
    DIST_SGD = "DistSgd"
    DANE_EXACT = "DaneExact"
    DANE_SGD = "DaneSgd"
    DANE_SVRG = "DaneSvrg"


DANE = {Algorithm.DANE_EXACT, Algorithm.DANE_SGD, Algorithm.DANE_SVRG}


class Access(str, Enum):
    FULL = "Full"
    FIXED_SUBSET = "FixedSubset"
    SUBSAMPLED_GRADIENT = "SubsampledGradient"


@dataclass(frozen=True)
class AccessMode:
    kind: Access = Access.FULL
    fraction: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Access(self.kind))
        if self.kind is Access.FULL:
            object.__setattr__(self, "fraction", 1.0)
        elif not 0 < self.fraction <= 1:
            raise ConfigError(f"fraction must lie in (0, 1], got {self.fraction}", "run.access_mode")

    def __str__(self):
        if self.kind is Access.FULL:
            return "Full"
        return f"{self.kind.value}({self.fraction!r})"

    @classmethod
    def parse(cls, text: str) -> AccessMode:
        m = re.fullmatch(r"\s*(\w+)\s*(?:\(\s*([^)]*)\s*\))?\s*", text)
        if not m:
            raise ConfigError(f"cannot parse {text!r}", "run.access_mode")
        kinds = {a.value.lower(): a for a in Access}
        kind = kinds.get(m.group(1).lower())
        if kind is None:
            raise ConfigError(f"unknown access mode {m.group(1)!r}", "run.access_mode")
        if kind is Access.FULL:
            return cls()
        if not m.group(2):
            raise ConfigError(f"{kind.value} needs a fraction, e.g. {kind.value}(0.5)",
                              "run.access_mode")
        try:
            fraction = float(m.group(2))
        except ValueError:
            raise ConfigError(f"cannot parse fraction {m.group(2)!r}", "run.access_mode") from None
        return cls(kind, fraction)


def resolve_steps(value, n: int) -> int:
    """Turn ``1500``, ``"1500"``, ``"2n"`` or ``"0.5n"`` into an integer step count."""
    steps = _parse_steps(value, n)
    if steps < 0:
        raise ConfigError(f"must be >= 0, got {value!r}", "run.T")
    return steps


def _parse_steps(value, n: int) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value)
    s = str(value).strip()
    if s.endswith("n"):
        factor = s[:-1].strip() or "1"
        try:
            steps = float(factor) * n
        except ValueError:
            raise ConfigError(f"cannot parse {value!r}", "run.T") from None
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError(f"{value!r} is not an integer for n={n}", "run.T")
        return int(round(steps))
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"cannot parse {value!r}", "run.T") from None


@dataclass(frozen=True)
class RunConfig:
    algorithm: Algorithm
    m: int = 4
    rounds: int = 20
    T: int | str = "1n"
    eta: float = defaults.ETA
    mu: float = defaults.MU
    schedule: Schedule | None = None
    svrg_alpha: float = defaults.SVRG_ALPHA
    svrg_output: str = defaults.SVRG_OUTPUT
    access_mode: AccessMode = field(default_factory=AccessMode)
    seed: int = 0
    workers: int = 1
    name: str = ""

    def __post_init__(self):
        try:
            object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        except ValueError:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}", "run.algorithm") from None
        if isinstance(self.access_mode, str):
            object.__setattr__(self, "access_mode", AccessMode.parse(self.access_mode))
        if self.schedule is None:
            object.__setattr__(self, "schedule", defaults.schedule_for(self.algorithm.value))
        if not self.name:
            object.__setattr__(self, "name", self.algorithm.value)
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.rounds, (int, np.integer)) or self.rounds < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.rounds!r}", "run.rounds")
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.m!r}", "run.m")
        if not self.eta > 0:
            raise ConfigError(f"must be > 0, got {self.eta}", "run.eta")
        if not self.mu >= 0:
            raise ConfigError(f"must be >= 0, got {self.mu}", "run.mu")
        if not self.svrg_alpha > 0:
            raise ConfigError(f"must be > 0, got {self.svrg_alpha}", "run.svrg_alpha")
        if self.svrg_output not in ("average", "last"):
            raise ConfigError(f"must be 'average' or 'last', got {self.svrg_output!r}",
                              "run.svrg_output")
        if self.workers < 1:
            raise ConfigError(f"must be >= 1, got {self.workers}", "run.workers")
        if self.seed < 0:
            raise ConfigError(f"must be >= 0, got {self.seed}", "run.seed")
        if self.algorithm is Algorithm.DANE_EXACT and self.access_mode.kind is Access.FIXED_SUBSET:
            raise UnsupportedError("DaneExact cannot run with FixedSubset access")
        if self.access_mode.kind is not Access.FULL and self.algorithm not in DANE:
            raise ConfigError(f"{self.algorithm.value} supports Full access only", "run.access_mode")

    def steps(self, n: int) -> int:
        T = resolve_steps(self.T, n)
        if T < 1 and self.algorithm is not Algorithm.DANE_EXACT:
            raise ConfigError(f"must be >= 1, got {T}", "run.T")
        return T

    def local_solver(self, n: int):
        if self.algorithm is Algorithm.DANE_EXACT:
            return Exact()
        if self.algorithm is Algorithm.DANE_SGD:
            return Sgd(self.steps(n), self.schedule)
        if self.algorithm is Algorithm.DANE_SVRG:
            return Svrg(self.steps(n), self.svrg_alpha, self.svrg_output == "average")
        raise ValueError(f"{self.algorithm.value} has no local solver")


@dataclass(frozen=True)
class Problem:
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    reg: float = defaults.REG
    holdout_size: int = defaults.HOLDOUT_SIZE

    def __post_init__(self):
        self.synthetic.validate()
        if not self.reg >= 0:
            raise ConfigError(f"must be >= 0, got {self.reg}", "problem.reg")
        if self.holdout_size < 0:
            raise ConfigError(f"must be >= 0, got {self.holdout_size}", "eval.holdout_size")


class Instance:
    """Training data, loss, evaluation context and cached partitions for one problem."""

    def __init__(self, problem: Problem | None = None, dataset: Dataset | None = None,
                 loss: Loss | None = None, ctx: EvalContext | None = None):
        self.problem = problem or Problem()
        self.dataset = dataset if dataset is not None else generate_synthetic(self.problem.synthetic)
        self.loss = loss or RidgeLoss(self.problem.reg)
        self._ctx = ctx
        self._shards = {}

    @cached_property
    def ctx(self) -> EvalContext:
        if self._ctx is not None:
            return self._ctx
        hold = None
        if self.problem.holdout_size > 0:
            hold = HoldoutStats.draw(self.problem.synthetic, self.problem.holdout_size)
        w_opt, f_opt = solve_optimum(self.dataset, self.loss)
        return EvalContext(w_opt, f_opt, self.dataset, self.loss, hold)

    def shards(self, m: int) -> list[Shard]:
        if m not in self._shards:
            self._shards[m] = partition(self.dataset, m, self.problem.synthetic.seed)
        return self._shards[m]


@dataclass
class RunResult:
    trace: Trace
    ledger: CostLedger
    iterates: list = field(default_factory=list)  # w after each round, round 0 first


def _average(vectors) -> np.ndarray:
    """Mean in fixed machine order."""
    acc = np.array(vectors[0], dtype=np.float64)
    for v in vectors[1:]:
        acc = acc + v
    return acc / len(vectors)


def _check_finite(w, t, machine=None):
    if not np.all(np.isfinite(w)):
        raise NumericalError("iterate is not finite; reduce the step size", round=t, machine=machine)


class _Recorder:
    def __init__(self, config: RunConfig, ctx: EvalContext, ledger: CostLedger, meta: dict):
        self.trace = Trace(config.algorithm.value, meta={k: str(v) for k, v in meta.items()})
        self.ctx = ctx
        self.ledger = ledger
        self.iterates = []

    def record(self, t: int, w) -> TracePoint:
        self.iterates.append(np.array(w, copy=True))
        s = suboptimality(w, self.ctx)
        p = TracePoint(t, self.ledger.max_grads_per_machine, self.ledger.comm_rounds,
                       self.ledger.floats_communicated, s, log10_floor(s),
                       population_error(w, self.ctx))
        self.trace.append(p)
        return p


def _meta(config: RunConfig, instance: Instance, n: int) -> dict:
    c = config
    sch = c.schedule
    meta = {
        "name": c.name,
        "algorithm": c.algorithm.value,
        "N": instance.dataset.n,
        "d": instance.dataset.d,
        "m": c.m,
        "n": n,
        "rounds": c.rounds,
        "T": c.steps(n) if c.algorithm is not Algorithm.DANE_EXACT else 0,
        "eta": repr(c.eta),
        "mu": repr(c.mu),
        "schedule.kind": sch.kind.value,
        "schedule.a0": repr(sch.a0),
        "schedule.decay": repr(sch.decay),
        "schedule.c": repr(sch.c),
        "svrg_alpha": repr(c.svrg_alpha),
        "svrg_output": c.svrg_output,
        "access_mode": str(c.access_mode),
        "seed": c.seed,
        "reg": repr(getattr(instance.loss, "reg", math.nan)),
        "holdout_size": instance.problem.holdout_size,
        "subopt_floor": repr(SUBOPT_FLOOR),
        "log_base": LOG_BASE,
        "comm_rounds_per_round": 2 if c.algorithm in DANE else (1 if c.algorithm is Algorithm.DIST_SGD else 0),
        "backend": kernels.backend(),
    }
    return meta


def _map(config: RunConfig, fn, items):
    if config.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_sgd(config: RunConfig, instance: Instance) -> RunResult:
    """Single-machine SGD over the whole dataset; one trace point every T steps."""
    n = instance.dataset.n // config.m
    T = config.steps(n)
    ledger = CostLedger(1)
    rec = _Recorder(config, instance.ctx, ledger, _meta(config, instance, n))
    w = np.zeros(instance.dataset.d)
    rec.record(0, w)
    for t in range(1, config.rounds + 1):
        w, _ = sgd_run(instance.loss, instance.dataset, config.schedule, T, w, config.seed,
                       k0=(t - 1) * T, round=t, machine=0, ledger=ledger)
        _check_finite(w, t, 0)
        rec.record(t, w)
    return RunResult(rec.trace, ledger, rec.iterates)


def run_dist_sgd(config: RunConfig, instance: Instance, shards: list[Shard] | None = None) -> RunResult:
    shards = shards if shards is not None else instance.shards(config.m)
    m = len(shards)
    n = shards[0].n
    T = config.steps(n)
    ledger = CostLedger(m)
    rec = _Recorder(config, instance.ctx, ledger, _meta(config, instance, n))
    w = np.zeros(instance.dataset.d)
    rec.record(0, w)
    for t in range(1, config.rounds + 1):
        anchor = w

        def work(i, t=t, anchor=anchor):
            sh = shards[i]
            wi, _ = sgd_run(instance.loss, sh, config.schedule, T, anchor, config.seed,
                            k0=(t - 1) * T, round=t, machine=sh.machine_id, ledger=None)
            _check_finite(wi, t, i)
            return wi

        local = _map(config, work, list(range(m)))
        for i in range(m):
            ledger.charge(i, T)
        w = _average(local)
        ledger.sync(instance.dataset.d)
        rec.record(t, w)
    return RunResult(rec.trace, ledger, rec.iterates)


def run_dane(config: RunConfig, instance: Instance, shards: list[Shard] | None = None) -> RunResult:
    if config.algorithm not in DANE:
        raise ConfigError(f"{config.algorithm.value} is not a DANE variant", "run.algorithm")
    shards = shards if shards is not None else instance.shards(config.m)
    m = len(shards)
    n = shards[0].n
    d = instance.dataset.d
    loss = instance.loss
    solver = config.local_solver(n)
    mode = config.access_mode
    ledger = CostLedger(m)
    rec = _Recorder(config, instance.ctx, ledger, _meta(config, instance, n))
    factorizations = {}
    if isinstance(solver, Exact):
        # the exact solve always sees the whole shard, so its matrix is fixed
        factorizations = {i: Factorization(loss, sh, config.mu) for i, sh in enumerate(shards)}

    w = np.zeros(d)
    prev = rec.record(0, w)
    for t in range(1, config.rounds + 1):
        anchor = w
        # gradient phase
        if mode.kind is Access.FULL:
            grad_views = list(shards)
        else:
            grad_views = [sh.local(sample_subset(sh, mode.fraction, config.seed, t)) for sh in shards]
        inner_views = grad_views if mode.kind is Access.FIXED_SUBSET else list(shards)
        local_grads = _map(config, lambda i: full_grad(loss, anchor, grad_views[i]), list(range(m)))
        for i in range(m):
            ledger.charge(i, grad_views[i].X.shape[0])
        G = _average(local_grads)
        ledger.sync(d)

        # local phase
        def work(i, t=t, anchor=anchor, G=G):
            sub = build_subproblem(anchor, local_grads[i], G, config.eta, config.mu)
            part = CostLedger(m)
            wi = local_solve(solver, sub, loss, inner_views[i], config.seed, t,
                             machine=shards[i].machine_id, ledger=part,
                             factorization=factorizations.get(i))
            _check_finite(wi, t, i)
            return wi, part

        results = _map(config, work, list(range(m)))
        for i, (_, part) in enumerate(results):
            ledger.charge(i, part.grads_per_machine[shards[i].machine_id])
            ledger.exact_solve_events += part.exact_solve_events
        w = _average([r[0] for r in results])
        ledger.sync(d)
        p = rec.record(t, w)
        if (config.algorithm is Algorithm.DANE_EXACT and mode.kind is Access.FULL
                and p.train_subopt > prev.train_subopt + MONOTONE_TOL):
            raise NumericalError(
                f"exact DANE suboptimality increased from {prev.train_subopt!r} to "
                f"{p.train_subopt!r}; try mu > 0", round=t)
        prev = p
    return RunResult(rec.trace, ledger, rec.iterates)


def run(config: RunConfig, instance: Instance | None = None) -> RunResult:
    """Run one configuration on ``instance`` (default: the default problem)."""
    instance = instance or Instance()
    if instance.dataset.n % config.m:
        raise ConfigError(f"m={config.m} does not divide N={instance.dataset.n}", "run.m")
    alg = config.algorithm
    if alg is Algorithm.SGD:
        return run_sgd(config, instance)
    if alg is Algorithm.IDEAL_DIST_SGD:
        res = run_sgd(config, instance)
        trace = ideal_dist_sgd(res.trace, config.m)
        trace.meta["algorithm"] = alg.value
        return RunResult(trace, res.ledger, res.iterates)
    if alg is Algorithm.DIST_SGD:
        return run_dist_sgd(config, instance)
    return run_dane(config, instance)


def predicted_grads_per_machine(config: RunConfig, n: int) -> int:
    """Closed-form final ``max_grads_per_machine`` of a run."""
    R = config.rounds
    alg = config.algorithm
    if config.access_mode.kind is not Access.FULL:
        k = math.floor(config.access_mode.fraction * n + 1e-9)
        view = k
    else:
        view = n
    T = config.steps(n) if alg is not Algorithm.DANE_EXACT else 0
    if alg is Algorithm.DANE_SVRG:
        return R * (view + 2 * T)
    if alg is Algorithm.DANE_SGD:
        return R * (view + T)
    if alg is Algorithm.DANE_EXACT:
        return R * (view + n)
    if alg is Algorithm.DIST_SGD:
        return R * T
    if alg is Algorithm.SGD:
        return R * T
    # IdealDistSgd: the single-machine count re-priced over m machines
    total = R * T
    return total // config.m if total % config.m == 0 else total / config.m


def predicted_comm_rounds(config: RunConfig) -> int:
    if config.algorithm in DANE:
        return 2 * config.rounds
    if config.algorithm is Algorithm.DIST_SGD:
        return config.rounds
    return 0
