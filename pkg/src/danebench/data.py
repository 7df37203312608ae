"""Synthetic regression data, datasets, machine shards and subsets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import rng
from .errors import ConfigError, ContractViolation


class Example(NamedTuple):
    x: np.ndarray
    y: float


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``X`` (N x d) and targets ``y`` (N,), read-only."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ContractViolation(f"inconsistent shapes X{X.shape} y{y.shape}")
        if X.shape[0] == 0 or X.shape[1] == 0:
            raise ContractViolation("dataset must be nonempty with d >= 1")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ContractViolation("dataset contains non-finite values")
        object.__setattr__(self, "X", _freeze(X))
        object.__setattr__(self, "y", _freeze(y))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> Example:
        return Example(self.X[j], float(self.y[j]))

    def __iter__(self):
        for j in range(self.n):
            yield self[j]

    def subset(self, indices) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise ContractViolation("empty subset")
        return Dataset(self.X[idx], self.y[idx])

    @classmethod
    def from_examples(cls, examples) -> Dataset:
        examples = list(examples)
        if not examples:
            raise ContractViolation("dataset must be nonempty")
        return cls(np.stack([np.asarray(e.x, dtype=np.float64) for e in examples]),
                   np.array([e.y for e in examples], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class Shard:
    """The rows of a parent dataset held by one machine.

    ``indices`` point into the parent; ``X`` and ``y`` are the machine's
    local contiguous copy.
    """

    machine_id: int
    indices: np.ndarray
    X: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)

    @classmethod
    def of(cls, dataset: Dataset, machine_id: int, indices) -> Shard:
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise ContractViolation("empty shard")
        if np.unique(idx).size != idx.size:
            raise ContractViolation("shard indices must be unique")
        idx.setflags(write=False)
        return cls(machine_id, idx, _freeze(dataset.X[idx]), _freeze(dataset.y[idx]))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n

    def local(self, positions) -> Dataset:
        """Dataset made of the given local positions (0..n-1) of this shard."""
        pos = np.asarray(positions, dtype=np.int64)
        if pos.size == 0:
            raise ContractViolation("empty subset")
        return Dataset(self.X[pos], self.y[pos])


@dataclass(frozen=True)
class SyntheticSpec:
    """Linear-Gaussian model ``y = <x, w_star> + noise`` with diagonal covariance.

    Coordinate ``i`` (1-based) of ``x`` has variance ``i ** -cov_exponent``.
    """

    d: int = 500
    n_total: int = 6000
    noise_std: float = 1.0
    cov_exponent: float = 1.2
    w_star: tuple | None = None  # None means all ones
    seed: int = 0

    def validate(self) -> None:
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.d!r}", "problem.d")
        if not isinstance(self.n_total, (int, np.integer)) or self.n_total < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.n_total!r}", "problem.n_total")
        if not (self.noise_std >= 0 and math.isfinite(self.noise_std)):
            raise ConfigError(f"must be finite and >= 0, got {self.noise_std!r}", "problem.noise_std")
        if not (self.cov_exponent >= 0 and math.isfinite(self.cov_exponent)):
            raise ConfigError(f"must be finite and >= 0, got {self.cov_exponent!r}",
                              "problem.cov_exponent")
        if self.w_star is not None and len(self.w_star) != self.d:
            raise ConfigError(f"length {len(self.w_star)} != d={self.d}", "problem.w_star")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"must be a nonnegative integer, got {self.seed!r}", "problem.seed")

    def truth(self) -> np.ndarray:
        if self.w_star is None:
            return np.ones(self.d)
        return np.asarray(self.w_star, dtype=np.float64)

    def stddevs(self) -> np.ndarray:
        i = np.arange(1, self.d + 1, dtype=np.float64)
        return i ** (-self.cov_exponent / 2.0)


def _draw(spec: SyntheticSpec, n: int, gen: np.random.Generator):
    X = gen.standard_normal((n, spec.d)) * spec.stddevs()
    noise = gen.standard_normal(n) * spec.noise_std
    y = X @ spec.truth() + noise
    return X, y


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    spec.validate()
    X, y = _draw(spec, spec.n_total, rng.stream(spec.seed, rng.DATA))
    return Dataset(X, y)


def generate_holdout_chunks(spec: SyntheticSpec, size: int, chunk: int = 10_000):
    """Yield ``(X, y)`` blocks of a fresh draw from the model.

    Uses the holdout stream, so it never overlaps the training draw.
    """
    spec.validate()
    if size < 1:
        raise ConfigError(f"must be >= 1, got {size}", "eval.holdout_size")
    for b, start in enumerate(range(0, size, chunk)):
        k = min(chunk, size - start)
        yield _draw(spec, k, rng.stream(spec.seed, rng.HOLDOUT, 0, b))


def generate_holdout(spec: SyntheticSpec, size: int) -> Dataset:
    blocks = list(generate_holdout_chunks(spec, size))
    return Dataset(np.concatenate([b[0] for b in blocks]), np.concatenate([b[1] for b in blocks]))


def partition(dataset: Dataset, m: int, seed: int) -> list[Shard]:
    """Randomly split ``dataset`` into ``m`` equal shards."""
    if m < 1:
        raise ConfigError(f"must be >= 1, got {m}", "run.m")
    if dataset.n % m:
        raise ConfigError(f"m={m} does not divide N={dataset.n}", "run.m")
    perm = rng.stream(seed, rng.PARTITION).permutation(dataset.n)
    n = dataset.n // m
    return [Shard.of(dataset, i, perm[i * n:(i + 1) * n]) for i in range(m)]


def subset_size(n: int, fraction: float) -> int:
    if not 0 < fraction <= 1:
        raise ConfigError(f"must lie in (0, 1], got {fraction}", "run.access_mode")
    k = math.floor(fraction * n + 1e-9)
    if k == 0:
        raise ConfigError(f"fraction {fraction} of n={n} selects no samples", "run.access_mode")
    return k


def sample_subset(shard: Shard, fraction: float, seed: int, round: int) -> np.ndarray:
    """Local positions (0..n-1) of a fresh random subset for one round."""
    k = subset_size(shard.n, fraction)
    gen = rng.stream(seed, rng.SUBSET, shard.machine_id, round)
    return np.sort(gen.choice(shard.n, size=k, replace=False))


def save_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + [f"x{i}" for i in range(1, dataset.d + 1)])
        for xi, yi in zip(dataset.X, dataset.y):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def load_csv(path) -> Dataset:
    path = Path(path)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if not header or header[0] != "y" or header[1:] != [f"x{i}" for i in range(1, len(header))]:
            raise ContractViolation(f"{path}: expected header y,x1,...,xd")
        rows = np.array([[float(v) for v in row] for row in r], dtype=np.float64)
    if rows.size == 0:
        raise ContractViolation(f"{path}: no data rows")
    return Dataset(rows[:, 1:], rows[:, 0])
