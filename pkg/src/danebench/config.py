"""Experiment files: flat ``section.key = value`` text.

Example::

    # problem
    problem.d = 500
    problem.n_total = 6000
    problem.machines = 4
    problem.reg = 0.005
    problem.seed = 0
    eval.holdout_size = 100000
    eval.target_log_subopt = -2.5
    run.svrg.algorithm = DaneSvrg
    run.svrg.T = 2n
    run.svrg.rounds = 20
    run.sgd.algorithm = DaneSgd
    run.sgd.schedule.c = 0.5

Keys are case-insensitive. Run blocks are ``run.<name>.<field>`` and keep
the order in which their names first appear. Environment variables
``DANEBENCH_<PATH>`` override keys, with ``__`` standing for ``.``:
``DANEBENCH_PROBLEM__SEED=3`` sets ``problem.seed``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import defaults
from .data import SyntheticSpec
from .errors import ConfigError
from .schedules import Schedule
from .sim import AccessMode, Problem, RunConfig, resolve_steps

ENV_PREFIX = "DANEBENCH_"

PROBLEM_KEYS = {"d", "n_total", "machines", "noise_std", "cov_exponent", "reg", "seed", "w_star"}
EVAL_KEYS = {"holdout_size", "target_log_subopt"}
RUN_KEYS = {
    "algorithm", "m", "rounds", "t", "eta", "mu", "schedule.kind", "schedule.a0",
    "schedule.decay", "schedule.c", "svrg_alpha", "svrg_output", "access_mode", "seed",
    "workers", "equalize_budget",
}


def parse_text(text: str, source: str = "<config>") -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key", key)
        entries[key] = value.strip()
    return entries


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX) and "__" in name:
            out[name[len(ENV_PREFIX):].lower().replace("__", ".")] = value.strip()
    return out


def _int(entries, key, default=None):
    if key not in entries:
        if default is None:
            raise ConfigError("missing required key", key)
        return default
    try:
        return int(entries[key])
    except ValueError:
        raise ConfigError(f"expected an integer, got {entries[key]!r}", key) from None


def _float(entries, key, default=None):
    if key not in entries:
        if default is None:
            raise ConfigError("missing required key", key)
        return default
    try:
        v = float(entries[key])
    except ValueError:
        raise ConfigError(f"expected a number, got {entries[key]!r}", key) from None
    if not math.isfinite(v):
        raise ConfigError(f"must be finite, got {entries[key]!r}", key)
    return v


def _bool(entries, key, default=False):
    if key not in entries:
        return default
    v = entries[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {entries[key]!r}", key)


@dataclass
class RunBlock:
    name: str
    config: RunConfig
    equalize_budget: bool = False

    def resolved(self, n: int) -> dict:
        c = self.config
        sch = c.schedule
        return {
            "name": self.name,
            "algorithm": c.algorithm.value,
            "m": c.m,
            "rounds": c.rounds,
            "T": str(c.T),
            "T_steps": c.steps(n) if c.algorithm.value != "DaneExact" else 0,
            "eta": c.eta,
            "mu": c.mu,
            "schedule": {"kind": sch.kind.value, "a0": sch.a0, "decay": sch.decay, "c": sch.c},
            "svrg_alpha": c.svrg_alpha,
            "svrg_output": c.svrg_output,
            "access_mode": str(c.access_mode),
            "seed": c.seed,
            "equalize_budget": self.equalize_budget,
        }


@dataclass
class ExperimentFile:
    problem: Problem
    machines: int
    runs: list = field(default_factory=list)
    target_log_subopt: float = defaults.TARGET_LOG10
    entries: dict = field(default_factory=dict)

    @property
    def n_per_machine(self) -> int:
        return self.problem.synthetic.n_total // self.machines


def _halve(T, n: int):
    steps = resolve_steps(T, n)
    return max(1, steps // 2)


def build(entries: dict, seed_override: int | None = None) -> ExperimentFile:
    entries = dict(entries)
    if seed_override is not None:
        entries["problem.seed"] = str(seed_override)
        for k in [k for k in entries if k.startswith("run.") and k.endswith(".seed")]:
            del entries[k]

    run_names = []
    for key in entries:
        section, _, rest = key.partition(".")
        if section == "problem":
            if rest not in PROBLEM_KEYS:
                raise ConfigError("unknown key", key)
        elif section == "eval":
            if rest not in EVAL_KEYS:
                raise ConfigError("unknown key", key)
        elif section == "run":
            name, _, field_ = rest.partition(".")
            if not name or field_ not in RUN_KEYS:
                raise ConfigError("unknown key", key)
            if name not in run_names:
                run_names.append(name)
        else:
            raise ConfigError("unknown section", key)
    if not run_names:
        raise ConfigError("no run blocks defined", "run")

    d = _int(entries, "problem.d", 500)
    w_star = None
    if "problem.w_star" in entries:
        try:
            w_star = tuple(float(v) for v in entries["problem.w_star"].split(","))
        except ValueError:
            raise ConfigError("expected comma-separated numbers", "problem.w_star") from None
    synthetic = SyntheticSpec(
        d=d,
        n_total=_int(entries, "problem.n_total", 6000),
        noise_std=_float(entries, "problem.noise_std", 1.0),
        cov_exponent=_float(entries, "problem.cov_exponent", 1.2),
        w_star=w_star,
        seed=_int(entries, "problem.seed", 0),
    )
    problem = Problem(synthetic, _float(entries, "problem.reg", defaults.REG),
                      _int(entries, "eval.holdout_size", defaults.HOLDOUT_SIZE))
    machines = _int(entries, "problem.machines", 4)
    if machines < 1:
        raise ConfigError(f"must be >= 1, got {machines}", "problem.machines")
    if synthetic.n_total % machines:
        raise ConfigError(f"{machines} does not divide n_total={synthetic.n_total}",
                          "problem.machines")
    exp = ExperimentFile(problem, machines,
                         target_log_subopt=_float(entries, "eval.target_log_subopt",
                                                  defaults.TARGET_LOG10),
                         entries=entries)
    for name in run_names:
        exp.runs.append(_run_block(entries, name, exp))
    return exp


def _run_block(entries: dict, name: str, exp: ExperimentFile) -> RunBlock:
    p = f"run.{name}."
    sub = {k[len(p):]: v for k, v in entries.items() if k.startswith(p)}
    if "algorithm" not in sub:
        raise ConfigError("missing required key", p + "algorithm")
    algorithm = sub["algorithm"]
    m = _int(sub, "m", exp.machines)
    if exp.problem.synthetic.n_total % m:
        raise ConfigError(f"{m} does not divide n_total={exp.problem.synthetic.n_total}", p + "m")
    n = exp.problem.synthetic.n_total // m
    base = defaults.schedule_for(algorithm)
    try:
        schedule = Schedule(
            sub.get("schedule.kind", base.kind.value),
            _float(sub, "schedule.a0", base.a0),
            _float(sub, "schedule.decay", base.decay),
            _float(sub, "schedule.c", base.c),
        )
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], p + (exc.key or "schedule")) from None
    except ValueError:
        raise ConfigError(f"unknown schedule kind {sub['schedule.kind']!r}", p + "schedule.kind") from None
    T = sub.get("t", "1n")
    try:
        equalize = _bool(sub, "equalize_budget")
        resolve_steps(T, n)
        if equalize and algorithm == "DaneSvrg":
            T = _halve(T, n)
        config = RunConfig(
            algorithm=algorithm,
            m=m,
            rounds=_int(sub, "rounds", 20),
            T=T,
            eta=_float(sub, "eta", defaults.ETA),
            mu=_float(sub, "mu", defaults.MU),
            schedule=schedule,
            svrg_alpha=_float(sub, "svrg_alpha", defaults.SVRG_ALPHA),
            svrg_output=sub.get("svrg_output", defaults.SVRG_OUTPUT),
            access_mode=AccessMode.parse(sub.get("access_mode", "Full")),
            seed=_int(sub, "seed", exp.problem.synthetic.seed),
            workers=_int(sub, "workers", 1),
            name=name,
        )
        config.steps(n)
    except ConfigError as exc:
        key = exc.key.split(".", 1)[-1] if exc.key else "?"
        raise ConfigError(str(exc).split(": ", 1)[-1], p + key.lower()) from None
    return RunBlock(name, config, equalize)


def load(path, seed_override: int | None = None, environ=None) -> ExperimentFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    entries = parse_text(text, str(path))
    entries.update(env_overrides(environ))
    return build(entries, seed_override)
