"""Time the numba kernels against the numpy fallbacks.

    python benchmarks/bench_kernels.py [--n 10 11 12] [--repeat 5] [--json]

Both kernel sets are imported side by side, so NWBENCH_NUMBA does not matter
here. Each kernel is checked for equal output before it is timed; numba
compile time is excluded by a warm-up call.
"""
import argparse
import json
import time

import numpy as np

from nwbench._accel import MIXED, NUMBA_KERNELS, NUMPY_KERNELS


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(ns, rng):
    for n in ns:
        table = rng.integers(0, 2, size=1 << n).astype(np.uint8)
        yield f"subcube_values n={n}", "subcube_values", (table, n)
        good = NUMPY_KERNELS["subcube_values"](table, n) != MIXED
        yield f"tree_depths n={n}", "tree_depths", (good, n)
    m, r, s = 16, 4, 16
    blocks = np.array([rng.choice(m, r, replace=False) for _ in range(s)], dtype=np.int64)
    hard = rng.integers(0, 2, size=1 << r).astype(np.uint8)
    yield f"nw_packed m={m} s={s}", "nw_packed", (0, 1 << m, blocks, hard)
    yield f"nw_bits m={m} s={s}", "nw_bits", (0, 1 << m, blocks, hard)
    n, terms = 16, 64
    care = rng.integers(0, 1 << n, size=terms, dtype=np.int64)
    val = care & rng.integers(0, 1 << n, size=terms, dtype=np.int64)
    weights = rng.integers(-3, 4, size=terms, dtype=np.int64)
    yield f"weighted_term_sum n={n} terms={terms}", "weighted_term_sum", (care, val, weights, n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 11, 12], help="table sizes for the DP kernels")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    rows = []
    for label, name, call in cases(args.n, rng):
        a = NUMPY_KERNELS[name](*call)
        b = NUMBA_KERNELS[name](*call)
        if not np.array_equal(a, b):
            raise SystemExit(f"{label}: backends disagree")
        t_np = best_of(NUMPY_KERNELS[name], call, args.repeat)
        t_nb = best_of(NUMBA_KERNELS[name], call, args.repeat)
        rows.append({"case": label, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb})

    if args.json:
        print(json.dumps(rows, indent=2))
        return
    width = max(len(r["case"]) for r in rows)
    print(f"{'case':<{width}}  {'numpy ms':>10}  {'numba ms':>10}  {'speedup':>8}")
    for r in rows:
        print(f"{r['case']:<{width}}  {r['numpy_s'] * 1e3:>10.3f}  {r['numba_s'] * 1e3:>10.3f}  {r['speedup']:>7.1f}x")


if __name__ == "__main__":
    main()
