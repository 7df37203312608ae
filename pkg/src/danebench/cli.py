"""Command line: ``danebench run | sweep | plot``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, config as cfgmod, defaults, kernels
from .errors import ConfigError, ContractViolation, NumericalError, UnsupportedError
from .metrics import grads_to_target, rounds_to_target
from .report import X_COLUMNS, Y_COLUMNS, line_chart
from .sim import Access, AccessMode, Instance, predicted_comm_rounds, resolve_steps, run
from .trace import COLUMNS, LOG_BASE, SUBOPT_FLOOR, read_csv, write_csv

log = logging.getLogger("danebench")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
MANIFEST = "manifest.json"

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "problem", "eval", "notes", "runs"],
    "properties": {
        "problem": {
            "type": "object",
            "required": ["d", "n_total", "machines", "noise_std", "cov_exponent", "reg", "seed"],
        },
        "eval": {
            "type": "object",
            "required": ["holdout_size", "target_log_subopt", "subopt_floor", "log_base"],
        },
        "notes": {"type": "object", "required": ["log_base", "subopt_floor", "comm_rounds"]},
        "runs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "label", "csv", "config", "ledger"],
                "properties": {
                    "config": {
                        "type": "object",
                        "required": ["algorithm", "T", "eta", "mu", "schedule", "svrg_alpha",
                                     "svrg_output", "access_mode", "seed"],
                        "properties": {
                            "schedule": {"type": "object",
                                         "required": ["kind", "a0", "decay", "c"]},
                        },
                    },
                },
            },
        },
    },
}


def _problem_dict(exp) -> dict:
    s = exp.problem.synthetic
    return {
        "d": s.d,
        "n_total": s.n_total,
        "machines": exp.machines,
        "noise_std": s.noise_std,
        "cov_exponent": s.cov_exponent,
        "w_star": "all-ones" if s.w_star is None else list(s.w_star),
        "reg": exp.problem.reg,
        "seed": s.seed,
    }


def _manifest(exp, runs: list[dict]) -> dict:
    return {
        "tool": "danebench",
        "version": __version__,
        "backend": kernels.backend(),
        "problem": _problem_dict(exp),
        "eval": {
            "holdout_size": exp.problem.holdout_size,
            "target_log_subopt": exp.target_log_subopt,
            "subopt_floor": SUBOPT_FLOOR,
            "log_base": LOG_BASE,
        },
        "defaults": {
            "dane_sgd_schedule": {"kind": defaults.DANE_SGD_SCHEDULE.kind.value,
                                  "a0": defaults.DANE_SGD_SCHEDULE.a0,
                                  "decay": defaults.DANE_SGD_SCHEDULE.decay,
                                  "c": defaults.DANE_SGD_SCHEDULE.c},
            "sgd_schedule": {"kind": defaults.SGD_SCHEDULE.kind.value,
                             "a0": defaults.SGD_SCHEDULE.a0,
                             "decay": defaults.SGD_SCHEDULE.decay,
                             "c": defaults.SGD_SCHEDULE.c},
            "svrg_alpha": defaults.SVRG_ALPHA,
            "svrg_output": defaults.SVRG_OUTPUT,
            "eta": defaults.ETA,
            "mu": defaults.MU,
            "holdout_size": defaults.HOLDOUT_SIZE,
        },
        "notes": {
            "log_base": "log10_subopt is log base 10 of train suboptimality",
            "subopt_floor": f"suboptimality is clamped at {SUBOPT_FLOOR!r} before the log",
            "comm_rounds": "DANE rounds count two communications (gradient, iterate); "
                           "DistSgd counts one per round",
            "grads": "gradient evaluations per machine; SVRG inner steps cost two",
        },
        "runs": runs,
    }


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _execute(block, instance, out: Path, filename: str, label: str, n: int, workers=None) -> dict:
    config = block.config if workers is None else replace(block.config, workers=workers)
    result = run(config, instance)
    write_csv(result.trace, out / filename)
    log.info("%s: %d rounds, final log10 subopt %.3f", label, config.rounds,
             result.trace.points[-1].log10_subopt)
    return {
        "name": block.name,
        "label": label,
        "csv": filename,
        "config": block.resolved(n),
        "ledger": result.ledger.as_dict(),
        "predicted_comm_rounds": predicted_comm_rounds(config),
        "_trace": result.trace,
    }


def _strip(runs):
    return [{k: v for k, v in r.items() if not k.startswith("_")} for r in runs]


def cmd_run(config_path, out_dir, seed_override=None, workers=None) -> int:
    exp = cfgmod.load(config_path, seed_override)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    instance = Instance(exp.problem)
    runs = []
    for block in exp.runs:
        n = exp.problem.synthetic.n_total // block.config.m
        runs.append(_execute(block, instance, out, f"{block.name}.csv", block.name, n, workers))
    _write_manifest(out, _manifest(exp, _strip(runs)))
    return EXIT_OK


def _parse_values(axis: str, values, n: int) -> list[str]:
    if values is None:
        return ["0.5n", "1n", "2n", "4n", "6n"] if axis == "T" else ["1.0", "0.5", "0.25"]
    items = [v.strip() for v in (values.split(",") if isinstance(values, str) else values)]
    items = [v for v in items if v]
    if not items:
        raise ConfigError("no sweep values given", "--values")
    for v in items:
        if axis == "T":
            resolve_steps(v, n)
        else:
            try:
                x = float(v)
            except ValueError:
                raise ConfigError(f"not a number: {v!r}", "--values") from None
            if not 0 < x <= 1:
                raise ConfigError(f"fraction must lie in (0, 1], got {v}", "--values")
    return items


def _with_axis(block, axis: str, value: str, n: int):
    c = block.config
    if axis == "T":
        T = value
        if block.equalize_budget and c.algorithm.value == "DaneSvrg":
            T = cfgmod._halve(value, n)
        return replace(block, config=replace(c, T=T))
    x = float(value)
    mode = c.access_mode
    kind = mode.kind if mode.kind is not Access.FULL else Access.FIXED_SUBSET
    new = AccessMode() if x == 1.0 and mode.kind is Access.FULL else AccessMode(kind, x)
    return replace(block, config=replace(c, access_mode=new))


def cmd_sweep(config_path, axis: str, values, out_dir, seed_override=None, workers=None) -> int:
    if axis not in ("T", "fraction"):
        raise ConfigError(f"axis must be T or fraction, got {axis!r}", "--axis")
    exp = cfgmod.load(config_path, seed_override)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    instance = Instance(exp.problem)
    runs, summary = [], []
    for block in exp.runs:
        n = exp.problem.synthetic.n_total // block.config.m
        for value in _parse_values(axis, values, n):
            swept = _with_axis(block, axis, value, n)
            tag = f"{axis}={value}"
            label = f"{block.name} {tag}"
            r = _execute(swept, instance, out, f"{block.name}__{tag}.csv", label, n, workers)
            r["sweep"] = {"axis": axis, "value": value}
            runs.append(r)
            trace = r["_trace"]
            rt = rounds_to_target(trace, exp.target_log_subopt)
            gt = grads_to_target(trace, exp.target_log_subopt)
            summary.append([block.name, axis, value, "" if rt is None else rt,
                            "" if gt is None else gt, repr(trace.points[-1].log10_subopt)])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "axis", "value", "rounds_to_target", "grads_to_target",
                    "final_log10_subopt"])
        w.writerows(summary)
    _write_manifest(out, _manifest(exp, _strip(runs)))
    return EXIT_OK


def _legend(path: Path, trace) -> str:
    manifest = path.parent / MANIFEST
    if manifest.exists():
        try:
            for r in json.loads(manifest.read_text()).get("runs", []):
                if r.get("csv") == path.name:
                    return r.get("label") or r.get("name")
        except (json.JSONDecodeError, AttributeError):
            pass
    return trace.meta.get("name") or trace.algorithm or path.stem


def cmd_plot(csv_paths, out_svg, x: str = "grads", y: str = "log10_subopt") -> int:
    if x not in X_COLUMNS:
        raise ConfigError(f"must be one of {sorted(X_COLUMNS)}, got {x!r}", "--x")
    if y not in Y_COLUMNS:
        raise ConfigError(f"must be one of {sorted(Y_COLUMNS)}, got {y!r}", "--y")
    if not csv_paths:
        raise ConfigError("no CSV files given", "csv")
    series = []
    for p in map(Path, csv_paths):
        if not p.is_file():
            raise ConfigError(f"no such file: {p}", "csv")
        try:
            trace = read_csv(p)
        except (ContractViolation, ValueError) as exc:
            raise ConfigError(f"{p}: schema mismatch ({exc})", "csv") from None
        xs = [float(v) for v in trace.column(X_COLUMNS[x][0])]
        ys = [float(v) for v in trace.column(Y_COLUMNS[y][0])]
        series.append((_legend(p, trace), xs, ys))
    Path(out_svg).write_text(line_chart(series, X_COLUMNS[x][1], Y_COLUMNS[y][1]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="danebench", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute every run block of a config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int, help="threads per round (results do not change)")

    s = sub.add_parser("sweep", help="repeat each run block over T or access fractions")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--axis", choices=["T", "fraction"], required=True)
    s.add_argument("--values", help="comma separated, e.g. 0.5n,1n,2n or 1,0.5,0.25")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)

    p = sub.add_parser("plot", help="draw trace CSVs into one SVG")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--x", default="grads", choices=sorted(X_COLUMNS))
    p.add_argument("--y", default="log10_subopt", choices=sorted(Y_COLUMNS))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out, args.seed, args.workers)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.axis, args.values, args.out, args.seed, args.workers)
        return cmd_plot(args.csv, args.out, args.x, args.y)
    except (ConfigError, ContractViolation, UnsupportedError) as exc:
        print(f"danebench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"danebench: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
