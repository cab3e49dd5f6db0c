"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is run on identical inputs through both paths; outputs are
compared for equality before any timing is reported.  The last block times
whole main-LP solves with the dispatcher switched each way.
"""
import argparse
import time

import numpy as np

from pmatmed import _kernels, lp
from pmatmed.generate import generate_instance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def pivot_case(rng, rows, cols, steps):
    M0 = rng.integers(-9, 10, size=(rows, cols)).astype(np.int64)

    def run(kernel):
        M = M0.copy()
        d = 1
        for s in range(steps):
            r, c = s % rows, s % cols
            if M[r, c] == 0:
                continue
            p = int(M[r, c])
            kernel(M, r, c, d)
            d = p
            if d < 0:
                M *= -1
                d = -d
            if np.abs(M).max() >= _kernels.INT64_SAFE:
                break
        return M
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can run")
        return
    rng = np.random.default_rng(0)
    rows = []

    run = pivot_case(rng, 110, 180, 8)
    assert np.array_equal(run(_kernels.pivot_numba), run(_kernels.pivot_numpy))
    rows.append(("pivot 110x180 x8", best_of(lambda: run(_kernels.pivot_numba), args.repeat),
                 best_of(lambda: run(_kernels.pivot_numpy), args.repeat)))

    A = rng.integers(-5, 6, size=(70, 70))
    p = 2147483647
    assert _kernels.rank_mod_p_numba(A, p) == _kernels.rank_mod_p_numpy(A, p)
    rows.append(("rank mod p 70x70", best_of(lambda: _kernels.rank_mod_p_numba(A, p), args.repeat),
                 best_of(lambda: _kernels.rank_mod_p_numpy(A, p), args.repeat)))

    n, m = 14, 16
    dist = rng.integers(0, 40, size=(n, m))
    fc = rng.integers(0, 20, size=n)
    dem = rng.integers(1, 4, size=m)
    a = _kernels.subset_costs_numba(dist, fc, dem, 41)
    b = _kernels.subset_costs_numpy(dist, fc, dem, 41)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    rows.append((f"subset costs 2^{n} x {m}",
                 best_of(lambda: _kernels.subset_costs_numba(dist, fc, dem, 41), args.repeat),
                 best_of(lambda: _kernels.subset_costs_numpy(dist, fc, dem, 41), args.repeat)))

    us = rng.integers(0, 8, size=14)
    vs = (us + rng.integers(1, 8, size=14)) % 8
    assert np.array_equal(_kernels.graphic_ranks_numba(us, vs, 8),
                          _kernels.graphic_ranks_numpy(us, vs, 8))
    rows.append(("graphic ranks 2^14", best_of(lambda: _kernels.graphic_ranks_numba(us, vs, 8),
                                                args.repeat),
                 best_of(lambda: _kernels.graphic_ranks_numpy(us, vs, 8), args.repeat)))

    insts = [generate_instance(s, n_fac=14, n_cli=16, matroid="partition", check=False)
             for s in range(4)]

    def solve_all():
        for inst in insts:
            lp.solve_main_lp(inst)

    saved = _kernels.USE_NUMBA
    try:
        _kernels.USE_NUMBA = True
        solve_all()  # compile outside the timed region
        t_nb = best_of(solve_all, max(1, args.repeat // 2))
        _kernels.USE_NUMBA = False
        t_np = best_of(solve_all, max(1, args.repeat // 2))
    finally:
        _kernels.USE_NUMBA = saved
    rows.append(("main LP, 4 x (14 fac, 16 cli)", t_nb, t_np))

    print(f"{'kernel':<32} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for name, t_nb, t_np in rows:
        print(f"{name:<32} {t_nb:>10.5f} {t_np:>10.5f} {t_np / t_nb:>8.1f}")


if __name__ == "__main__":
    main()
