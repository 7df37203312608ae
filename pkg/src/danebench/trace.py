"""Per-round trace records and their CSV form.

Column order is fixed::

    algorithm, round, max_grads_per_machine, comm_rounds, floats_communicated,
    train_subopt, log10_subopt, pop_error

Comment lines starting with ``#`` carry ``key=value`` metadata. Floats are
written with ``repr`` so parsing gives back the exact in-memory values.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ContractViolation

COLUMNS = (
    "algorithm",
    "round",
    "max_grads_per_machine",
    "comm_rounds",
    "floats_communicated",
    "train_subopt",
    "log10_subopt",
    "pop_error",
)
SUBOPT_FLOOR = 1e-16
LOG_BASE = 10


@dataclass(frozen=True)
class TracePoint:
    round: int
    max_grads_per_machine: int | float
    comm_rounds: int
    floats_communicated: int
    train_subopt: float
    log10_subopt: float
    pop_error: float


@dataclass
class Trace:
    algorithm: str
    points: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, p: TracePoint) -> None:
        if self.points and p.round <= self.points[-1].round:
            raise ContractViolation("trace rounds must be strictly increasing")
        self.points.append(p)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def column(self, name: str) -> list:
        return [getattr(p, name) for p in self.points]

    def with_points(self, points) -> Trace:
        return Trace(self.algorithm, list(points), dict(self.meta))


def _fmt(v) -> str:
    if isinstance(v, bool):
        raise TypeError("bool in trace")
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _parse_num(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        return float(s)


def to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    for k, v in trace.meta.items():
        buf.write(f"# {k}={v}\n")
    buf.write(",".join(COLUMNS) + "\n")
    for p in trace.points:
        row = [trace.algorithm, str(p.round), _fmt(p.max_grads_per_machine), str(p.comm_rounds),
               str(p.floats_communicated), _fmt(p.train_subopt), _fmt(p.log10_subopt),
               _fmt(p.pop_error)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_csv(trace: Trace, path) -> None:
    Path(path).write_text(to_csv(trace))


def from_csv(text: str) -> Trace:
    meta = {}
    header = None
    algorithm = None
    points = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
            continue
        cells = line.split(",")
        if header is None:
            header = tuple(c.strip() for c in cells)
            if header != COLUMNS:
                raise ContractViolation(f"unexpected CSV columns {header}")
            continue
        if len(cells) != len(COLUMNS):
            raise ContractViolation(f"row has {len(cells)} cells, expected {len(COLUMNS)}")
        algorithm = cells[0]
        points.append(TracePoint(int(cells[1]), _parse_num(cells[2]), int(cells[3]), int(cells[4]),
                                 float(cells[5]), float(cells[6]), float(cells[7])))
    if header is None:
        raise ContractViolation("no CSV header found")
    return Trace(algorithm or meta.get("algorithm", ""), points, meta)


def read_csv(path) -> Trace:
    return from_csv(Path(path).read_text())


def log10_floor(subopt: float) -> float:
    return math.log10(max(subopt, SUBOPT_FLOOR))


def rescale_grads(trace: Trace, m: int, algorithm: str | None = None) -> Trace:
    """Divide the gradient column by ``m``; every other column is untouched."""
    def div(g):
        q = g / m
        return int(q) if isinstance(g, int) and g % m == 0 else q
    pts = [replace(p, max_grads_per_machine=div(p.max_grads_per_machine)) for p in trace.points]
    out = trace.with_points(pts)
    if algorithm:
        out.algorithm = algorithm
    return out
