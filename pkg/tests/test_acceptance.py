"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Problem sizes follow the desk-scale setup: d = 500, ridge 0.005 folded into
every sample, eta = 1, mu = 0, (N, m) in {(6000, 4), (12000, 16)}.
Run with ``pytest tests/test_acceptance.py -v``; the status lines are
repeated in the terminal summary.
"""

import warnings

import numpy as np
import pytest

from danebench import Instance, Problem, RunConfig, SyntheticSpec, build_subproblem, full_grad, kernels, run
from danebench.cli import main as cli_main
from danebench.metrics import grads_to_target, plateau_point, rounds_to_target, value_at_budget
from danebench.objective import (
    grad_sample, loss_sample, risk, subproblem_grad, subproblem_grad_sample, subproblem_sample_value,
    subproblem_value,
)
from danebench.sim import Algorithm, predicted_comm_rounds, predicted_grads_per_machine
from danebench.solvers import draw_rows

from _oracles import central_diff, rel_err
from _report import report

TARGET = -2.5
_instances = {}
_runs = []


def instance(N, seed=0, d=500):
    key = (N, seed, d)
    if key not in _instances:
        _instances[key] = Instance(Problem(SyntheticSpec(d=d, n_total=N, seed=seed)))
    return _instances[key]


def execute(inst, algorithm, **kw):
    cfg = RunConfig(algorithm, seed=inst.problem.synthetic.seed, **kw)
    res = run(cfg, inst)
    _runs.append((cfg, inst.dataset.n, res))
    return res


def check(number, title, ok, detail):
    report(number, title, "PASS" if ok else "FAIL", detail)
    assert ok, detail


# 1 ---------------------------------------------------------------------------

def test_criterion_01_gradients_match_finite_differences():
    inst = instance(400, seed=1, d=50)
    loss = inst.loss
    shards = inst.shards(4)
    sh = shards[0]
    r = np.random.default_rng(2024)
    worst = {"loss": 0.0, "risk": 0.0, "subproblem": 0.0, "sgd_direction": 0.0, "svrg_direction": 0.0}
    for _ in range(10):
        w, anchor = r.standard_normal(50), r.standard_normal(50)
        eta, mu = r.uniform(0.5, 1.5), r.uniform(0.0, 1.0)
        grads = [full_grad(loss, anchor, s) for s in shards]
        sub = build_subproblem(anchor, grads[0], np.mean(grads, axis=0), eta, mu)
        j = r.integers(sh.n)
        z = (sh.X[j], sh.y[j])
        worst["loss"] = max(worst["loss"], rel_err(
            grad_sample(loss, w, z), central_diff(lambda v: loss_sample(loss, v, z), w)))
        worst["risk"] = max(worst["risk"], rel_err(
            full_grad(loss, w, sh), central_diff(lambda v: risk(loss, v, sh), w)))
        worst["subproblem"] = max(worst["subproblem"], rel_err(
            subproblem_grad(sub, loss, w, sh), central_diff(lambda v: subproblem_value(sub, loss, v, sh), w)))
        worst["sgd_direction"] = max(worst["sgd_direction"], rel_err(
            subproblem_grad_sample(sub, loss, w, z),
            central_diff(lambda v: subproblem_sample_value(sub, loss, v, z), w)))

        # variance-reduced direction: gradient of
        # f(w,z) - <grad f(anchor,z), w> + eta <G, w> + mu/2 |w - anchor|^2
        g_snap = grad_sample(loss, anchor, z)

        def potential(v):
            return (loss_sample(loss, v, z) - g_snap @ v + eta * sub.global_grad @ v
                    + 0.5 * mu * np.sum((v - anchor) ** 2))

        direction = grad_sample(loss, w, z) - g_snap + eta * sub.global_grad + mu * (w - anchor)
        worst["svrg_direction"] = max(worst["svrg_direction"], rel_err(direction, central_diff(potential, w)))
    ok = all(v <= 1e-5 for v in worst.values())
    check(1, "analytic gradients vs central differences (1e-5 rel)", ok,
          ", ".join(f"{k}={v:.1e}" for k, v in worst.items()))


# 2 ---------------------------------------------------------------------------

def _reference_distributed_svrg(inst, m, rounds, T, alpha, seed):
    """Distributed SVRG written from scratch: snapshot and full gradient are
    refreshed every round, machines run T steps, iterates are averaged."""
    loss = inst.loss
    shards = inst.shards(m)
    w = np.zeros(inst.dataset.d)
    out = [w]
    for t in range(1, rounds + 1):
        h = full_grad(loss, w, shards[0])
        for sh in shards[1:]:
            h = h + full_grad(loss, w, sh)
        h = h / m
        local = []
        for sh in shards:
            v = w.copy()
            acc = np.zeros_like(v)
            for j in draw_rows(sh.n, T, seed, sh.machine_id, t):
                z = (sh.X[j], sh.y[j])
                v = v - alpha * (grad_sample(loss, v, z) - grad_sample(loss, w, z) + h)
                acc = acc + v
            local.append(acc / T)
        w = local[0]
        for v in local[1:]:
            w = w + v
        w = w / m
        out.append(w)
    return out


def test_criterion_02_dane_svrg_is_distributed_svrg_bit_for_bit():
    inst = instance(1000, seed=0, d=20)
    with kernels.use_backend("python"):
        res = execute(inst, "DaneSvrg", m=4, rounds=5, T="1n", eta=1.0, mu=0.0)
    ref = _reference_distributed_svrg(inst, 4, 5, 250, res_alpha(res), 0)
    same = [np.array_equal(a, b) for a, b in zip(res.iterates, ref)]
    ok = len(same) == 6 and all(same)
    mism = max(float(np.max(np.abs(a - b))) for a, b in zip(res.iterates, ref))
    check(2, "DaneSvrg (eta=1, mu=0) == distributed SVRG, 5 rounds, bit-identical", ok,
          f"rounds identical={sum(same) - 1}/5, max |diff|={mism:.1e} (python backend)")


def res_alpha(res):
    return float(res.trace.meta["svrg_alpha"])


# 3 ---------------------------------------------------------------------------

def test_criterion_03_one_shot_exactness():
    inst = instance(6000)
    res = execute(inst, "DaneExact", m=1, rounds=1)
    s = res.trace.points[1].train_subopt
    check(3, "DaneExact m=1 suboptimality <= 1e-10 after one round", s <= 1e-10, f"subopt={s:.2e}")


# 4 ---------------------------------------------------------------------------

def test_criterion_04_exact_dane_quality_and_monotonicity():
    res = execute(instance(6000), "DaneExact", m=4, rounds=20)
    subs = res.trace.column("train_subopt")
    r = rounds_to_target(res.trace, TARGET)
    mono = all(b <= a + 1e-9 for a, b in zip(subs, subs[1:]))
    ok = r is not None and r <= 20 and mono
    check(4, "DaneExact (6000,4) reaches log10 <= -2.5 within 20 rounds, monotone", ok,
          f"rounds_to_target={r}, monotone={mono}")


# 5 ---------------------------------------------------------------------------

def test_criterion_05_svrg_tracks_exact_dane():
    inst = instance(6000)
    exact = execute(inst, "DaneExact", m=4, rounds=10).trace.column("log10_subopt")
    svrg = execute(inst, "DaneSvrg", m=4, rounds=10, T="6n").trace.column("log10_subopt")
    gaps = [abs(a - b) for a, b in zip(exact[1:], svrg[1:])]
    ok = max(gaps) <= 0.5
    check(5, "DaneSvrg T=6n within 0.5 log10 of DaneExact for rounds 1-10 (6000,4)", ok,
          f"max gap={max(gaps):.3f} at round {int(np.argmax(gaps)) + 1}")


# 6 ---------------------------------------------------------------------------

BUDGET_N = 100  # per-machine budget in units of n, enough for every curve to flatten


def _ordering(N, m):
    inst = instance(N)
    n = N // m
    # rounds chosen so each curve covers the same per-machine budget of 100n
    svrg = execute(inst, "DaneSvrg", m=m, rounds=BUDGET_N // 5, T="2n").trace
    dsgd = execute(inst, "DaneSgd", m=m, rounds=-(-BUDGET_N // 3), T="2n").trace
    dist = execute(inst, "DistSgd", m=m, rounds=BUDGET_N // 2, T="2n").trace
    ideal = execute(inst, "IdealDistSgd", m=m, rounds=BUDGET_N // 2 * m, T="2n").trace

    plateau = plateau_point(dist)
    budget = plateau.max_grads_per_machine
    svrg_at = value_at_budget(svrg, budget)
    lower = svrg_at < plateau.log10_subopt

    inf = float("inf")
    g = {name: grads_to_target(tr, TARGET) for name, tr in
         (("DaneSvrg", svrg), ("DistSgd", dist), ("DaneSgd", dsgd), ("IdealDistSgd", ideal))}
    g = {k: (inf if v is None else v) for k, v in g.items()}
    fewer = {k: g["DaneSvrg"] < v for k, v in g.items() if k != "DaneSvrg"}
    detail = (f"({N},{m}) DistSgd plateau at {budget} grads ({budget / n:.0f}n): "
              f"DistSgd {plateau.log10_subopt:.2f} vs DaneSvrg {svrg_at:.2f}; grads to -2.5: "
              + ", ".join(f"{k}={v:g}" for k, v in g.items()))
    return lower and all(fewer.values()), detail, fewer


def test_criterion_06_qualitative_ordering():
    results = [_ordering(6000, 4), _ordering(12000, 16)]
    ok = all(r[0] for r in results)
    failed = [f"{N}:{k}" for (N, r) in zip((6000, 12000), results) for k, v in r[2].items() if not v]
    detail = " || ".join(r[1] for r in results)
    if failed:
        detail += " || not fewer than: " + ", ".join(failed)
    check(6, "DaneSvrg beats DistSgd at its plateau and reaches -2.5 with fewest grads", ok, detail)


# 7 ---------------------------------------------------------------------------

def test_criterion_07_early_phase_sgd_advantage_soft():
    inst = instance(6000)
    n = 1500
    sgd = execute(inst, "DaneSgd", m=4, rounds=3, T="0.5n").trace
    svrg = execute(inst, "DaneSvrg", m=4, rounds=3, T="0.5n").trace
    # the first point where both curves exist: DaneSvrg's first completed round
    budget = svrg.points[1].max_grads_per_machine
    a, b = value_at_budget(sgd, budget), value_at_budget(svrg, budget)
    ok = a <= b
    detail = f"budget={budget} ({budget / n:.1f}n): DaneSgd {a:.3f} vs DaneSvrg {b:.3f}"
    report(7, "early phase: DaneSgd <= DaneSvrg at matched budget (soft)", "PASS" if ok else "WARN", detail)
    if not ok:
        warnings.warn(f"soft criterion 7 not met: {detail}")


# 8 ---------------------------------------------------------------------------

def test_criterion_08_limited_access_ordering():
    inst = instance(6000)
    rounds = 20
    # per round both spend x*n + 2n gradients per machine
    fs_sgd = execute(inst, "DaneSgd", m=4, rounds=rounds, T="2n", access_mode="FixedSubset(0.25)").trace
    fs_svrg = execute(inst, "DaneSvrg", m=4, rounds=rounds, T="1n", access_mode="FixedSubset(0.25)").trace
    same_budget = fs_sgd.points[-1].max_grads_per_machine == fs_svrg.points[-1].max_grads_per_machine
    best_sgd, best_svrg = min(fs_sgd.column("log10_subopt")), min(fs_svrg.column("log10_subopt"))

    sg25 = execute(inst, "DaneSgd", m=4, rounds=rounds, T="2n", access_mode="SubsampledGradient(0.25)").trace
    full = execute(inst, "DaneSgd", m=4, rounds=rounds, T="2n").trace
    b25, b100 = min(sg25.column("log10_subopt")), min(full.column("log10_subopt"))

    ok = same_budget and best_svrg > best_sgd and abs(b25 - b100) <= 0.5
    check(8, "FixedSubset 25%: SVRG worse than SGD; SubsampledGradient 25% within 0.5 of 100%", ok,
          f"FixedSubset best DaneSgd {best_sgd:.3f} vs DaneSvrg {best_svrg:.3f} (equal budgets={same_budget}); "
          f"SubsampledGradient DaneSgd 25% {b25:.3f} vs 100% {b100:.3f}")


# 9 ---------------------------------------------------------------------------

GRID = [
    ("Sgd", "Full"), ("IdealDistSgd", "Full"), ("DistSgd", "Full"),
    ("DaneExact", "Full"), ("DaneExact", "SubsampledGradient(0.5)"),
    ("DaneSgd", "Full"), ("DaneSgd", "FixedSubset(0.25)"), ("DaneSgd", "SubsampledGradient(0.25)"),
    ("DaneSvrg", "Full"), ("DaneSvrg", "FixedSubset(0.5)"), ("DaneSvrg", "SubsampledGradient(0.3)"),
]


def test_criterion_09_accounting_exactness():
    inst = instance(6000)
    for algorithm, access in GRID:
        for T in ("0.5n", "2n"):
            execute(inst, algorithm, m=4, rounds=3, T=T, access_mode=access)
    bad = []
    for cfg, N, res in _runs:
        n = N // cfg.m
        alg = cfg.algorithm
        last = res.trace.points[-1]
        m_eff = 1 if alg in (Algorithm.SGD, Algorithm.IDEAL_DIST_SGD) else cfg.m
        d = len(res.iterates[0])
        checks = [
            last.max_grads_per_machine == predicted_grads_per_machine(cfg, n),
            res.ledger.comm_rounds == last.comm_rounds == predicted_comm_rounds(cfg),
            res.ledger.floats_communicated == 2 * m_eff * d * predicted_comm_rounds(cfg),
            res.ledger.exact_solve_events == (cfg.rounds * cfg.m if alg is Algorithm.DANE_EXACT else 0),
            all(isinstance(v, int) for v in res.ledger.grads_per_machine),
        ]
        if not all(checks):
            bad.append(f"{alg.value}/{cfg.access_mode}/{cfg.T}")
    check(9, "final ledger counters equal closed-form predictions (exact integers)", not bad,
          f"{len(_runs)} runs checked" + (f"; mismatches: {bad}" if bad else ""))


# 10 --------------------------------------------------------------------------

CONFIG = """
problem.d = 500
problem.n_total = 6000
problem.machines = 4
""" + "".join(f"run.{a.lower()}.algorithm = {a}\nrun.{a.lower()}.rounds = 3\nrun.{a.lower()}.T = 0.5n\n"
              for a in ("Sgd", "IdealDistSgd", "DistSgd", "DaneExact", "DaneSgd", "DaneSvrg")) + """
run.fixed.algorithm = DaneSvrg
run.fixed.rounds = 3
run.fixed.access_mode = FixedSubset(0.5)
run.subs.algorithm = DaneSgd
run.subs.rounds = 3
run.subs.access_mode = SubsampledGradient(0.25)
"""


def test_criterion_10_determinism(tmp_path):
    cfg = tmp_path / "all.cfg"
    cfg.write_text(CONFIG)
    outs = {}
    for tag, extra in (("first", []), ("second", []), ("threads", ["--workers", "4"])):
        assert cli_main(["run", "--config", str(cfg), "--out", str(tmp_path / tag), *extra]) == 0
        outs[tag] = {p.name: p.read_bytes() for p in sorted((tmp_path / tag).glob("*.csv"))}
    twice = outs["first"] == outs["second"]
    threads = outs["first"] == outs["threads"]
    check(10, "byte-identical CSVs across repeats and 1 vs 4 worker threads", twice and threads,
          f"{len(outs['first'])} CSVs; repeat identical={twice}, threads identical={threads}")
