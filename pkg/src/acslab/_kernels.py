"""Hot enumeration and solver kernels.

Everything here scans candidate link-state vectors encoded as bit patterns
(link i congested <=> bit i set, so |L| <= 24 keeps patterns in int64 range)
or runs small dense solver loops. The numba-compiled versions are picked up
automatically; set ACSLAB_NO_NUMBA=1 to force the vectorized numpy fallbacks.
Both paths compute the same quantities and are cross-checked in the test
suite and timed against each other in benchmarks/bench_kernels.py.

Constraint modes, shared by all scan kernels:
  MODE_BCS  - target[j] is the Boolean path status, pattern feasible when
              (congested count on path j > 0) == target[j]
  MODE_CAT  - target[j] in {0,1,2}, feasible when min(count, 2) == target[j]
  MODE_PLUS - target[j] is the exact congested-link count on path j
"""

from __future__ import annotations

import os

import numpy as np

MODE_BCS = 0
MODE_CAT = 1
MODE_PLUS = 2

#: Largest link count the exhaustive scans accept (2^24 patterns).
MAX_EXHAUSTIVE_LINKS = 24

_CHUNK = 1 << 16

_forced_off = os.environ.get("ACSLAB_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}
try:
    if _forced_off:
        raise ImportError("numba disabled by ACSLAB_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    njit = None
    NUMBA_ENABLED = False


def path_masks(routing: np.ndarray) -> np.ndarray:
    """Per-path link bitmask, int64, from a (P, L) 0/1 routing matrix."""
    r = np.asarray(routing, dtype=np.int64)
    weights = np.int64(1) << np.arange(r.shape[1], dtype=np.int64)
    return (r * weights).sum(axis=1)


def pattern_to_bits(patterns, n_links: int) -> np.ndarray:
    """Decode int patterns into a (n, L) uint8 matrix."""
    idx = np.asarray(patterns, dtype=np.int64).reshape(-1)
    shifts = np.arange(n_links, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def bits_to_pattern(bits) -> int:
    b = np.asarray(bits, dtype=np.int64)
    weights = np.int64(1) << np.arange(b.shape[-1], dtype=np.int64)
    return int((b * weights).sum(axis=-1))


def _check_links(n_links: int) -> None:
    from .errors import CapacityError

    if n_links > MAX_EXHAUSTIVE_LINKS:
        raise CapacityError(
            f"{n_links} links exceeds the exhaustive scan limit of "
            f"{MAX_EXHAUSTIVE_LINKS}; use the sampled fallback"
        )


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------


def _counts_chunk(routing_t: np.ndarray, start: int, stop: int, n_links: int):
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n_links, dtype=np.int64)
    bits = ((idx[:, None] >> shifts) & 1).astype(np.int32)
    return idx, bits, bits @ routing_t


def _violations_for(counts: np.ndarray, mode: int, target: np.ndarray) -> np.ndarray:
    if mode == MODE_BCS:
        mism = (counts > 0) != (target > 0)
    elif mode == MODE_CAT:
        mism = np.minimum(counts, 2) != target
    elif mode == MODE_PLUS:
        mism = counts != target
    else:
        raise ValueError(f"unknown mode {mode}")
    return mism.sum(axis=1)


def _scan_feasible_np(routing: np.ndarray, mode: int, target: np.ndarray) -> np.ndarray:
    P, L = routing.shape
    routing_t = np.ascontiguousarray(routing.T, dtype=np.int32)
    tgt = np.asarray(target, dtype=np.int32)
    out = []
    for start in range(0, 1 << L, _CHUNK):
        stop = min(start + _CHUNK, 1 << L)
        idx, _, counts = _counts_chunk(routing_t, start, stop, L)
        ok = _violations_for(counts, mode, tgt) == 0
        out.append(idx[ok])
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def _min_violation_np(routing: np.ndarray, mode: int, target: np.ndarray):
    P, L = routing.shape
    routing_t = np.ascontiguousarray(routing.T, dtype=np.int32)
    tgt = np.asarray(target, dtype=np.int32)
    best = P + 1
    chunks = []
    for start in range(0, 1 << L, _CHUNK):
        stop = min(start + _CHUNK, 1 << L)
        idx, _, counts = _counts_chunk(routing_t, start, stop, L)
        viol = _violations_for(counts, mode, tgt)
        vmin = int(viol.min())
        if vmin < best:
            best = vmin
            chunks = [idx[viol == vmin]]
        elif vmin == best:
            chunks.append(idx[viol == vmin])
    return np.concatenate(chunks), best


def _map_select_np(routing, mode, target, weights):
    P, L = routing.shape
    routing_t = np.ascontiguousarray(routing.T, dtype=np.int32)
    tgt = np.asarray(target, dtype=np.int32)
    w = np.asarray(weights, dtype=np.float64)
    best_viol = P + 1
    best_cost = np.inf
    best_pattern = -1
    for start in range(0, 1 << L, _CHUNK):
        stop = min(start + _CHUNK, 1 << L)
        idx, bits, counts = _counts_chunk(routing_t, start, stop, L)
        viol = _violations_for(counts, mode, tgt)
        vmin = int(viol.min())
        if vmin > best_viol:
            continue
        if vmin < best_viol:
            best_viol = vmin
            best_cost = np.inf
            best_pattern = -1
        sel = viol == vmin
        costs = bits[sel].astype(np.float64) @ w
        k = int(np.argmin(costs))
        if costs[k] < best_cost:
            best_cost = float(costs[k])
            best_pattern = int(idx[sel][k])
    return best_pattern, best_viol, best_cost


def _distance_gap_np(routing, truth_bits, b_target, cat_target):
    """Pooled Hamming sums of (a) cat-feasible and (b) BCS-but-not-cat patterns."""
    P, L = routing.shape
    routing_t = np.ascontiguousarray(routing.T, dtype=np.int32)
    tb = np.asarray(truth_bits, dtype=np.int32)
    truth_pattern = int((tb.astype(np.int64) << np.arange(L, dtype=np.int64)).sum())
    b_tgt = np.asarray(b_target, dtype=np.int32)
    c_tgt = np.asarray(cat_target, dtype=np.int32)
    sum_acs = 0
    n_acs = 0
    sum_only = 0
    n_only = 0
    table = np.array([bin(v).count("1") for v in range(256)], dtype=np.int64)
    for start in range(0, 1 << L, _CHUNK):
        stop = min(start + _CHUNK, 1 << L)
        idx, _, counts = _counts_chunk(routing_t, start, stop, L)
        bcs_ok = _violations_for(counts, MODE_BCS, b_tgt) == 0
        cat_ok = _violations_for(counts, MODE_CAT, c_tgt) == 0
        ham = table[np.bitwise_xor(idx, truth_pattern).view(np.uint8).reshape(-1, 8)].sum(axis=1)
        sum_acs += int(ham[cat_ok].sum())
        n_acs += int(cat_ok.sum())
        only = bcs_ok & ~cat_ok
        sum_only += int(ham[only].sum())
        n_only += int(only.sum())
    return sum_acs, n_acs, sum_only, n_only


def _nnls_scan_np(columns, b, patterns, max_sweeps, tol):
    """Restricted nonnegative least squares for each support pattern.

    Batched coordinate descent: one coordinate at a time, vectorized across
    all supports, so the update order matches the compiled kernel.
    """
    P, L = columns.shape
    pats = np.asarray(patterns, dtype=np.int64)
    n = pats.shape[0]
    gram = columns.T @ columns
    corr = columns.T @ b
    diag = np.diag(gram).copy()
    diag[diag == 0.0] = 1.0
    member = ((pats[:, None] >> np.arange(L, dtype=np.int64)) & 1).astype(bool)
    z = np.zeros((n, L), dtype=np.float64)
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(L):
            m = member[:, i]
            if not m.any():
                continue
            resid_corr = corr[i] - z[m] @ gram[:, i] + z[m, i] * gram[i, i]
            new = np.maximum(0.0, resid_corr / diag[i])
            delta = max(delta, float(np.abs(new - z[m, i]).max(initial=0.0)))
            z[m, i] = new
        if delta < tol:
            break
    resid = ((z @ columns.T) - b).astype(np.float64)
    residuals = (resid * resid).sum(axis=1)
    return residuals, z


def _lasso_nn_cd_np(gram, corr, lam, max_sweeps, tol):
    L = gram.shape[0]
    z = np.zeros(L, dtype=np.float64)
    diag = np.diag(gram).copy()
    diag[diag == 0.0] = 1.0
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        delta = 0.0
        for i in range(L):
            num = corr[i] - float(gram[i] @ z) + gram[i, i] * z[i] - 0.5 * lam
            new = max(0.0, num / diag[i])
            delta = max(delta, abs(new - z[i]))
            z[i] = new
        if delta < tol:
            break
    return z, sweeps


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _popcount64(x):
        x = x - ((x >> 1) & 0x5555555555555555)
        x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
        return (x * 0x0101010101010101) >> 56

    @njit(cache=True)
    def _violations_nb(masks, x, mode, target):
        v = 0
        for j in range(masks.shape[0]):
            c = _popcount64(masks[j] & x)
            if mode == 0:
                if (c > 0) != (target[j] > 0):
                    v += 1
            elif mode == 1:
                cc = c if c < 2 else 2
                if cc != target[j]:
                    v += 1
            else:
                if c != target[j]:
                    v += 1
        return v

    @njit(cache=True)
    def _scan_feasible_nb(masks, n_links, mode, target):
        total = np.int64(1) << n_links
        hits = 0
        for x in range(total):
            if _violations_nb(masks, x, mode, target) == 0:
                hits += 1
        out = np.empty(hits, dtype=np.int64)
        k = 0
        for x in range(total):
            if _violations_nb(masks, x, mode, target) == 0:
                out[k] = x
                k += 1
        return out

    @njit(cache=True)
    def _min_violation_nb(masks, n_links, mode, target):
        total = np.int64(1) << n_links
        best = masks.shape[0] + 1
        hits = 0
        for x in range(total):
            v = _violations_nb(masks, x, mode, target)
            if v < best:
                best = v
                hits = 1
            elif v == best:
                hits += 1
        out = np.empty(hits, dtype=np.int64)
        k = 0
        for x in range(total):
            if _violations_nb(masks, x, mode, target) == best:
                out[k] = x
                k += 1
        return out, best

    @njit(cache=True)
    def _map_select_nb(masks, n_links, mode, target, weights):
        total = np.int64(1) << n_links
        best_viol = masks.shape[0] + 1
        best_cost = np.inf
        best_pattern = np.int64(-1)
        for x in range(total):
            v = _violations_nb(masks, x, mode, target)
            if v > best_viol:
                continue
            cost = 0.0
            for i in range(n_links):
                if (x >> i) & 1:
                    cost += weights[i]
            if v < best_viol or (v == best_viol and cost < best_cost):
                best_viol = v
                best_cost = cost
                best_pattern = x
        return best_pattern, best_viol, best_cost

    @njit(cache=True)
    def _distance_gap_nb(masks, n_links, truth_pattern, b_target, cat_target):
        total = np.int64(1) << n_links
        sum_acs = np.int64(0)
        n_acs = np.int64(0)
        sum_only = np.int64(0)
        n_only = np.int64(0)
        for x in range(total):
            bcs_ok = _violations_nb(masks, x, 0, b_target) == 0
            cat_ok = _violations_nb(masks, x, 1, cat_target) == 0
            if not (bcs_ok or cat_ok):
                continue
            d = _popcount64(x ^ truth_pattern)
            if cat_ok:
                sum_acs += d
                n_acs += 1
            elif bcs_ok:
                sum_only += d
                n_only += 1
        return sum_acs, n_acs, sum_only, n_only

    @njit(cache=True)
    def _nnls_scan_nb(columns, b, patterns, max_sweeps, tol):
        P, L = columns.shape
        n = patterns.shape[0]
        gram = columns.T @ columns
        corr = columns.T @ b
        z = np.zeros((n, L), dtype=np.float64)
        residuals = np.empty(n, dtype=np.float64)
        for s in range(n):
            pat = patterns[s]
            for _ in range(max_sweeps):
                delta = 0.0
                for i in range(L):
                    if not (pat >> i) & 1:
                        continue
                    g = gram[i, i]
                    if g == 0.0:
                        continue
                    acc = corr[i]
                    for kk in range(L):
                        if kk != i:
                            acc -= gram[kk, i] * z[s, kk]
                    new = acc / g
                    if new < 0.0:
                        new = 0.0
                    diff = new - z[s, i]
                    if diff < 0.0:
                        diff = -diff
                    if diff > delta:
                        delta = diff
                    z[s, i] = new
                if delta < tol:
                    break
            rq = 0.0
            for j in range(P):
                r = -b[j]
                for i in range(L):
                    r += columns[j, i] * z[s, i]
                rq += r * r
            residuals[s] = rq
        return residuals, z

    @njit(cache=True)
    def _lasso_nn_cd_nb(gram, corr, lam, max_sweeps, tol):
        L = gram.shape[0]
        z = np.zeros(L, dtype=np.float64)
        sweeps = 0
        for sweep in range(max_sweeps):
            sweeps = sweep + 1
            delta = 0.0
            for i in range(L):
                g = gram[i, i]
                if g == 0.0:
                    continue
                acc = corr[i] - 0.5 * lam
                for kk in range(L):
                    if kk != i:
                        acc -= gram[kk, i] * z[kk]
                new = acc / g
                if new < 0.0:
                    new = 0.0
                d = abs(new - z[i])
                if d > delta:
                    delta = d
                z[i] = new
            if delta < tol:
                break
        return z, sweeps


# ---------------------------------------------------------------------------
# public dispatchers
# ---------------------------------------------------------------------------


def scan_feasible(routing: np.ndarray, mode: int, target) -> np.ndarray:
    """All bit patterns satisfying the constraint, in ascending order."""
    routing = np.asarray(routing)
    _check_links(routing.shape[1])
    tgt = np.asarray(target, dtype=np.int64)
    if NUMBA_ENABLED:
        return _scan_feasible_nb(path_masks(routing), routing.shape[1], mode, tgt)
    return _scan_feasible_np(routing, mode, tgt)


def min_violation_patterns(routing: np.ndarray, mode: int, target):
    """Patterns with the fewest mismatched paths, plus that violation count."""
    routing = np.asarray(routing)
    _check_links(routing.shape[1])
    tgt = np.asarray(target, dtype=np.int64)
    if NUMBA_ENABLED:
        pats, v = _min_violation_nb(path_masks(routing), routing.shape[1], mode, tgt)
        return pats, int(v)
    pats, v = _min_violation_np(routing, mode, tgt)
    return pats, int(v)


def map_select(routing: np.ndarray, mode: int, target, weights):
    """Lexicographic minimum of (violations, sum of selected weights).

    Ties resolve to the lowest pattern value, i.e. lowest link indices first.
    Returns (pattern, violations, cost).
    """
    routing = np.asarray(routing)
    _check_links(routing.shape[1])
    tgt = np.asarray(target, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    if NUMBA_ENABLED:
        pat, v, c = _map_select_nb(path_masks(routing), routing.shape[1], mode, tgt, w)
        return int(pat), int(v), float(c)
    pat, v, c = _map_select_np(routing, mode, tgt, w)
    return int(pat), int(v), float(c)


def distance_gap_scan(routing: np.ndarray, truth_bits, b_target, cat_target):
    """Hamming-distance sums of cat-feasible vs BCS-only-feasible patterns.

    Returns (sum_d_acs, n_acs, sum_d_bcs_only, n_bcs_only) where sums are in
    raw bit counts (divide by |L| for the normalized distance).
    """
    routing = np.asarray(routing)
    _check_links(routing.shape[1])
    tb = np.asarray(truth_bits, dtype=np.int64)
    b_tgt = np.asarray(b_target, dtype=np.int64)
    c_tgt = np.asarray(cat_target, dtype=np.int64)
    if NUMBA_ENABLED:
        truth_pattern = int((tb << np.arange(routing.shape[1], dtype=np.int64)).sum())
        res = _distance_gap_nb(
            path_masks(routing), routing.shape[1], truth_pattern, b_tgt, c_tgt
        )
        return tuple(int(v) for v in res)
    return _distance_gap_np(routing, tb, b_tgt, c_tgt)


def nnls_scan(columns: np.ndarray, b, patterns, max_sweeps: int = 2000, tol: float = 1e-12):
    """Nonnegative least squares restricted to each support pattern.

    columns is the (P, L) float design matrix; returns (residuals, z) with
    squared residual norms per support and the fitted coefficients (zeros off
    support).
    """
    cols = np.ascontiguousarray(columns, dtype=np.float64)
    bvec = np.ascontiguousarray(b, dtype=np.float64)
    pats = np.ascontiguousarray(patterns, dtype=np.int64)
    if NUMBA_ENABLED:
        return _nnls_scan_nb(cols, bvec, pats, max_sweeps, tol)
    return _nnls_scan_np(cols, bvec, pats, max_sweeps, tol)


def lasso_nn_cd(columns: np.ndarray, b, lam: float, max_sweeps: int = 10_000, tol: float = 1e-8):
    """L1-regularized nonnegative least squares by coordinate descent.

    Minimizes ||columns @ z - b||^2 + lam * sum(z) over z >= 0. Returns
    (z, sweeps, converged).
    """
    cols = np.ascontiguousarray(columns, dtype=np.float64)
    bvec = np.ascontiguousarray(b, dtype=np.float64)
    gram = cols.T @ cols
    corr = cols.T @ bvec
    if NUMBA_ENABLED:
        z, sweeps = _lasso_nn_cd_nb(gram, corr, float(lam), max_sweeps, tol)
    else:
        z, sweeps = _lasso_nn_cd_np(gram, corr, float(lam), max_sweeps, tol)
    return z, int(sweeps), int(sweeps) < max_sweeps


def sample_patterns(routing: np.ndarray, mode: int, target, n_samples: int, rng):
    """Rejection-sampled feasible patterns for nets beyond the scan limit.

    Draws uniform random link vectors and keeps the ones matching the
    constraint; returns unique patterns (possibly empty).
    """
    routing = np.asarray(routing, dtype=np.int64)
    tgt = np.asarray(target, dtype=np.int64)
    L = routing.shape[1]
    kept = set()
    for _ in range(n_samples):
        bits = (rng.random(L) < 0.5).astype(np.int64)
        counts = routing @ bits
        if _violations_for(counts[None, :], mode, tgt)[0] == 0:
            kept.add(int((bits << np.arange(L, dtype=np.int64)).sum()))
    return np.array(sorted(kept), dtype=np.int64)
