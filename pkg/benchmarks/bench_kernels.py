#!/usr/bin/env python3
"""Time the compiled kernels against their numpy fallbacks.

Runs each hot kernel on representative desk-scale workloads and prints a
table with both timings and the speedup. The compiled path needs numba
importable (do not set ACSLAB_NO_NUMBA when running this).

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from acslab import _kernels as K
from acslab.topology import load_topology


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(1)
    out = []

    geant = load_topology("GEANT")
    r17 = geant.routing
    x = (rng.random(geant.n_links) < 0.4).astype(np.int64)
    counts = r17.astype(np.int64) @ x
    b = (counts > 0).astype(np.int64)
    cat = np.minimum(counts, 2)
    w = rng.normal(size=geant.n_links)
    masks17 = K.path_masks(r17)

    out.append((
        "scan_feasible (GEANT, 2^17 x 15 paths, cat)",
        lambda: K._scan_feasible_nb(masks17, 17, K.MODE_CAT, cat),
        lambda: K._scan_feasible_np(r17, K.MODE_CAT, cat),
    ))
    out.append((
        "map_select (GEANT, 2^17, BCS)",
        lambda: K._map_select_nb(masks17, 17, K.MODE_BCS, b, w),
        lambda: K._map_select_np(r17, K.MODE_BCS, b, w),
    ))
    out.append((
        "distance_gap_scan (GEANT, 2^17)",
        lambda: K._distance_gap_nb(masks17, 17, int(K.bits_to_pattern(x)), b, cat),
        lambda: K._distance_gap_np(r17, x, b, cat),
    ))

    ernet = load_topology("ERNET")
    r13 = ernet.routing.astype(np.float64)
    z = np.where(rng.random(ernet.n_links) < 0.4, 0.05, 0.0)
    bvec = r13 @ z
    pats = K.scan_feasible(ernet.routing, K.MODE_BCS,
                           (bvec > 1e-9).astype(np.int64)).astype(np.int64)
    out.append((
        f"nnls_scan (ERNET, {pats.size} supports)",
        lambda: K._nnls_scan_nb(r13, bvec, pats, 2000, 1e-12),
        lambda: K._nnls_scan_np(r13, bvec, pats, 2000, 1e-12),
    ))

    gram, corr = r13.T @ r13, r13.T @ bvec
    out.append((
        "lasso_nn_cd (ERNET, 10k sweeps cap)",
        lambda: K._lasso_nn_cd_nb(gram, corr, 0.01, 10_000, 1e-12),
        lambda: K._lasso_nn_cd_np(gram, corr, 0.01, 10_000, 1e-12),
    ))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K.NUMBA_ENABLED:
        raise SystemExit("numba is unavailable (or ACSLAB_NO_NUMBA is set); "
                         "nothing to compare")
    print(f"{'kernel':<48} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, nb, ref in workloads():
        nb()  # JIT warmup outside the timed region
        t_nb = timeit(nb, args.repeat)
        t_np = timeit(ref, args.repeat)
        print(f"{name:<48} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
