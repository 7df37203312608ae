"""Time the inner-loop kernels and one full run on each available backend.

Usage::

    python benchmarks/bench_kernels.py [--d 500] [--n 1500] [--steps 3000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from danebench import Instance, Problem, RunConfig, SyntheticSpec, kernels, run


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(d, n, steps, seed=0):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, d))
    y = r.standard_normal(n)
    idx = r.integers(0, n, steps).astype(np.int64)
    alphas = np.full(steps, 1e-3)
    w, anchor, shift, eta_g = (r.standard_normal(d) for _ in range(4))
    return {
        "sgd_steps": lambda k: k.sgd_steps(X, y, idx, alphas, w, 0.005),
        "dane_sgd_steps": lambda k: k.dane_sgd_steps(X, y, idx, alphas, w, 0.005, shift, 0.0, anchor),
        "svrg_steps": lambda k: k.svrg_steps(X, y, idx, 1e-3, w, anchor, 0.005, eta_g, 0.0, True),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=500)
    ap.add_argument("--n", type=int, default=1500)
    ap.add_argument("--steps", type=int, default=3000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.available()
    cases = kernel_cases(args.d, args.n, args.steps)
    print(f"kernels: d={args.d}, n={args.n}, steps={args.steps}, best of {args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases.items():
        t = {b: best_of(lambda: fn(kernels._BACKENDS[b]), args.repeat) for b in backends}
        speed = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        print(f"{name:<16}" + "".join(f"{t[b] * 1e3:>12.2f}ms" for b in backends) + f"{speed:>9.1f}x")

    inst = Instance(Problem(SyntheticSpec(d=args.d, n_total=4 * args.n), holdout_size=10_000))
    inst.ctx  # build the optimum and holdout outside the timed region
    cfg = RunConfig("DaneSvrg", m=4, rounds=5, T="2n")
    print(f"\nfull run: DaneSvrg, (N, m)=({4 * args.n}, 4), T=2n, 5 rounds")
    for b in backends:
        with kernels.use_backend(b):
            t = best_of(lambda: run(cfg, inst), 1)
        print(f"{b:<16}{t:>12.2f}s")


if __name__ == "__main__":
    main()
