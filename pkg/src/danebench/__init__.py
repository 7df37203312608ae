"""Desk-scale simulator for DANE with exact, SGD and SVRG local solvers."""

from .data import Dataset, Example, Shard, SyntheticSpec, generate_synthetic, partition, sample_subset
from .errors import ConfigError, ContractViolation, NumericalError, UnsupportedError
from .ledger import CostLedger
from .objective import RidgeLoss, SubproblemSpec, build_subproblem, exact_minimize, full_grad
from .schedules import Schedule, step_size
from .sim import AccessMode, Algorithm, Instance, Problem, RunConfig, run
from .trace import Trace, TracePoint

__version__ = "0.1.0"
