"""Compare the numba-compiled kernels against the numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--nodes 20000] [--users 200000] [--repeats 5]
"""
import argparse
import timeit

import numpy as np

from rumornet import _kernels as K
from rumornet._accel import USE_NUMBA


def cascade_inputs(n_nodes, mean_degree, rng):
    n_edges = int(n_nodes * mean_degree)
    src = rng.integers(0, n_nodes, size=n_edges)
    dst = rng.integers(0, n_nodes, size=n_edges)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    order = np.argsort(dst, kind="stable")
    src, dst = src[order], dst[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n_nodes), out=indptr[1:])
    weight = rng.integers(1, 4, size=len(src))
    thresholds = rng.integers(1, 11, size=n_nodes)
    state = np.zeros(n_nodes, dtype=np.int8)
    state[rng.choice(n_nodes, size=max(1, n_nodes // 1000), replace=False)] = K.SEED
    return indptr, src, weight, thresholds, state


def curve_inputs(n_users, rng):
    e = rng.integers(0, 60, size=n_users)
    t = np.where(rng.random(n_users) < 0.4, rng.integers(0, 61, size=n_users), -1)
    return e, np.minimum(t, e)


def bench(label, fn, repeats):
    fn()  # warm-up, includes numba compilation on the first call
    best = min(timeit.repeat(fn, number=1, repeat=repeats))
    print(f"  {label:<8} {best * 1e3:9.2f} ms")
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=20_000)
    ap.add_argument("--degree", type=float, default=8.0)
    ap.add_argument("--users", type=int, default=200_000)
    ap.add_argument("--k-max", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"numba enabled: {USE_NUMBA}")

    cin = cascade_inputs(args.nodes, args.degree, rng)
    print(f"cascade: {args.nodes} nodes, {len(cin[1])} edges")
    a = K.run_cascade_kernel(*cin, use_numba=True)
    b = K.run_cascade_kernel(*cin, use_numba=False)
    assert a[0] == b[0] and all(np.array_equal(x, y) for x, y in zip(a[1:4], b[1:4]))
    t_jit = bench("numba", lambda: K.run_cascade_kernel(*cin, use_numba=True), args.repeats)
    t_np = bench("numpy", lambda: K.run_cascade_kernel(*cin, use_numba=False), args.repeats)
    print(f"  speedup  {t_np / t_jit:9.2f}x  ({a[0]} iterations)")

    e, t = curve_inputs(args.users, rng)
    print(f"sharing curve: {args.users} users, k_max={args.k_max}")
    a = K.sharing_counts(e, t, args.k_max, use_numba=True)
    b = K.sharing_counts(e, t, args.k_max, use_numba=False)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    t_jit = bench("numba", lambda: K.sharing_counts(e, t, args.k_max, use_numba=True), args.repeats)
    t_np = bench("numpy", lambda: K.sharing_counts(e, t, args.k_max, use_numba=False), args.repeats)
    print(f"  speedup  {t_np / t_jit:9.2f}x")


if __name__ == "__main__":
    main()
