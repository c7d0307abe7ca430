"""Path congestion status algebra.

A link-state vector X marks each link congested (1) or not (0). From the
routing matrix R three per-path observations derive:

* Boolean status  B_j = 1 iff path j crosses at least one congested link
  (element-wise OR of the row with X);
* additive count  A+_j = R_j . X, the number of congested links on the path;
* category        A_j = min(A+_j, 2) in {none, single, multiple}.

The feasible sets {X : observation matches} nest: exact counts are the
tightest constraint, categories next, Boolean status loosest. This module
also carries the agreement-dominance property that makes a strictly more
agreeing estimate at least as good on precision/recall/F-beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, metrics
from .errors import CapacityError
from .seeding import as_rng

MODES = {
    "bcs": _kernels.MODE_BCS,
    "cat": _kernels.MODE_CAT,
    "acs": _kernels.MODE_CAT,
    "plus": _kernels.MODE_PLUS,
    "acs+": _kernels.MODE_PLUS,
}


@dataclass(frozen=True)
class AcsLabel:
    """Per-path congestion label: exact count and 3-way category.

    Oracle labels always satisfy cat == min(plus, 2); predicted or corrupted
    labels may not, and each diagnosis mode reads only its own field.
    """

    plus: int
    cat: int

    @classmethod
    def from_plus(cls, plus: int) -> "AcsLabel":
        plus = int(plus)
        if plus < 0:
            raise ValueError("congested-link count cannot be negative")
        return cls(plus=plus, cat=min(plus, 2))


def labels_to_arrays(labels):
    """Split a label sequence into (plus, cat) int arrays."""
    plus = np.array([l.plus for l in labels], dtype=np.int64)
    cat = np.array([l.cat for l in labels], dtype=np.int64)
    return plus, cat


def _check_dims(routing, x):
    routing = np.asarray(routing)
    x = np.asarray(x)
    if routing.ndim != 2 or x.ndim != 1 or routing.shape[1] != x.shape[0]:
        raise ValueError(
            f"dimension mismatch: routing {routing.shape} vs link vector {x.shape}"
        )
    return routing.astype(np.int64), x.astype(np.int64)


def boolean_status(routing, x) -> np.ndarray:
    """B = R OR X: Boolean path vector (uint8)."""
    r, xv = _check_dims(routing, x)
    return ((r @ xv) > 0).astype(np.uint8)


def acs_plus(routing, x) -> np.ndarray:
    """A+ = R . X: congested-link count per path."""
    r, xv = _check_dims(routing, x)
    return r @ xv


def acs_cat(plus) -> np.ndarray:
    """Category vector: 0 none, 1 single, 2 multiple."""
    return np.minimum(np.asarray(plus, dtype=np.int64), 2)


def path_labels(routing, x):
    """Oracle AcsLabel list for a known link-state vector."""
    return [AcsLabel.from_plus(p) for p in acs_plus(routing, x)]


def distance(x, x_prime) -> float:
    """Normalized Hamming distance: 1 - (agreements / length)."""
    a = np.asarray(x)
    b = np.asarray(x_prime)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(1.0 - (a == b).mean())


def feasible_patterns(routing, observation, mode) -> np.ndarray:
    """Bit patterns of every link vector consistent with the observation."""
    m = MODES[str(mode).lower()]
    return _kernels.scan_feasible(routing, m, observation)


def enumerate_solutions(routing, observation, mode) -> np.ndarray:
    """All consistent link vectors as a (n, |L|) 0/1 matrix.

    Exhaustive over 2^|L|; raises CapacityError above
    ``_kernels.MAX_EXHAUSTIVE_LINKS`` links (use sample_solutions then).
    """
    routing = np.asarray(routing)
    pats = feasible_patterns(routing, observation, mode)
    return _kernels.pattern_to_bits(pats, routing.shape[1])


def sample_solutions(routing, observation, mode, n_samples, seed) -> np.ndarray:
    """Rejection-sampled consistent link vectors for oversized nets."""
    routing = np.asarray(routing)
    m = MODES[str(mode).lower()]
    rng = as_rng(seed)
    pats = _kernels.sample_patterns(routing, m, observation, n_samples, rng)
    return _kernels.pattern_to_bits(pats, routing.shape[1])


def patterns_to_hex(patterns):
    """Feasible set as sorted hex strings, the exchange format for cross-checks."""
    return [format(int(p), "x") for p in np.sort(np.asarray(patterns))]


def mean_distance_gap(topology, p, trials, seed):
    """Average distance-to-truth of category-feasible solutions vs solutions
    feasible for the Boolean observation only.

    Ground truths are sampled with per-link congestion probability p;
    distances are pooled over all solutions of all trials. Returns
    (mean_d_acs, mean_d_bcs_only); the second is NaN when no trial produced
    a BCS-only solution (degenerate, e.g. p = 0).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"congestion probability {p} outside [0, 1]")
    routing = topology.routing
    n_links = topology.n_links
    if n_links > _kernels.MAX_EXHAUSTIVE_LINKS:
        raise CapacityError(f"{n_links} links: exhaustive distance gap capped at "
                            f"{_kernels.MAX_EXHAUSTIVE_LINKS}")
    rng = as_rng(seed)
    sum_acs = n_acs = sum_only = n_only = 0
    for _ in range(int(trials)):
        truth = (rng.random(n_links) < p).astype(np.uint8)
        plus = acs_plus(routing, truth)
        b = (plus > 0).astype(np.int64)
        cat = acs_cat(plus)
        da, na, do, no = _kernels.distance_gap_scan(routing, truth, b, cat)
        sum_acs += da
        n_acs += na
        sum_only += do
        n_only += no
    mean_acs = (sum_acs / n_acs / n_links) if n_acs else float("nan")
    mean_only = (sum_only / n_only / n_links) if n_only else float("nan")
    return mean_acs, mean_only


def agreement_dominates(a, b, b_prime) -> bool:
    """True iff b' agrees with a strictly more than b does, position-wise:
    the agreement set of b' is a proper superset of b's."""
    a = np.asarray(a)
    b = np.asarray(b)
    bp = np.asarray(b_prime)
    if not (a.shape == b.shape == bp.shape):
        raise ValueError("length mismatch")
    agree_b = b == a
    agree_bp = bp == a
    return bool(agree_bp[agree_b].all() and agree_bp.sum() > agree_b.sum())


def metric_monotonicity_check(a, b, b_prime, betas=(0.5, 1.0, 2.0)) -> bool:
    """True iff precision, recall and every F-beta are non-decreasing from
    b to b' when scored against truth a."""
    if metrics.recall(a, b_prime) < metrics.recall(a, b):
        return False
    if metrics.precision(a, b_prime) < metrics.precision(a, b):
        return False
    for beta in betas:
        if metrics.f_beta(a, b_prime, beta=beta) < metrics.f_beta(a, b, beta=beta):
            return False
    return True
