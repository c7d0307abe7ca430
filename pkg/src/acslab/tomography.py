"""Congested-link diagnosis and loss-rate inference.

Three solver families, each runnable unconstrained or constrained by
per-path congestion labels (categories or exact counts):

* ``clink``     Boolean diagnosis as maximum-a-posteriori weighted set
                cover: minimize sum(log((1-p_i)/p_i)) over selected links
                subject to covering every congested path. Greedy when
                unconstrained; exact pattern scan when constrained (or
                greedy plus single-bit repair beyond the scan limit).
* ``netscope``  analog inference: path losses map to the log domain
                (b_j = -ln(1-loss_j)) and an L1-regularized nonnegative
                least squares is solved by coordinate descent; constrained
                runs re-fit on the best label-feasible support.
* ``sumtomo``   range inference: nonnegative least squares on every
                feasible support; each link reports the [min, max] of its
                fitted value across supports (0 when some support omits it).

Infeasible label sets (possible with noisy labels) are reported, not
raised: the solver falls back to the minimum-violation solution and lists
the mismatched paths on the Diagnosis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .acs import MODES, labels_to_arrays
from .errors import ConfigError
from .seeding import as_rng

LOSS_CONGESTED_THRESHOLD = 0.01  # inferred link loss above 1% means congested
DEFAULT_LAMBDA = 0.01
MAX_SUPPORTS = 65536


@dataclass(frozen=True)
class Priors:
    """Per-link prior congestion probabilities, strictly inside (0, 1)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise ConfigError("priors must lie strictly inside (0, 1)")
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls, p: float, n_links: int, eps: float = 1e-9) -> "Priors":
        return cls(np.full(n_links, float(np.clip(p, eps, 1.0 - eps))))

    def weights(self) -> np.ndarray:
        """MAP cost per link: log((1-p)/p), negative when p > 1/2."""
        return np.log((1.0 - self.p) / self.p)


@dataclass
class Diagnosis:
    x_hat: np.ndarray
    z_hat: Optional[np.ndarray] = None
    ranges: Optional[np.ndarray] = None      # (L, 2) loss-rate bounds
    objective: Optional[float] = None
    residual: Optional[float] = None
    converged: bool = True
    infeasible: bool = False
    violated_paths: tuple = ()
    mode: str = "none"
    algorithm: str = ""

    def to_json(self) -> str:
        doc = {
            "algorithm": self.algorithm,
            "mode": self.mode,
            "x_hat": "".join(str(int(v)) for v in self.x_hat),
            "z_hat": None if self.z_hat is None else [float(v) for v in self.z_hat],
            "ranges": None if self.ranges is None else
                      [[float(a), float(b)] for a, b in self.ranges],
            "objective": self.objective,
            "residual": self.residual,
            "converged": self.converged,
            "infeasible": self.infeasible,
            "violated_paths": list(self.violated_paths),
        }
        return json.dumps(doc, sort_keys=True)


def _constraint(routing, acs_mode, acs, b_status):
    """(kernel mode, target vector) for a diagnosis mode."""
    acs_mode = str(acs_mode).lower()
    if acs_mode == "none":
        if b_status is None:
            raise ConfigError("mode 'none' needs the Boolean path status")
        return _kernels.MODE_BCS, np.asarray(b_status, dtype=np.int64)
    if acs is None:
        raise ConfigError(f"mode {acs_mode!r} needs per-path labels")
    plus, cat = labels_to_arrays(acs)
    if acs_mode in ("cat", "acs"):
        return _kernels.MODE_CAT, cat
    if acs_mode in ("plus", "acs+"):
        return _kernels.MODE_PLUS, plus
    raise ConfigError(f"unknown diagnosis mode {acs_mode!r}")


def _mismatched_paths(routing, x, kmode, target):
    counts = np.asarray(routing, dtype=np.int64) @ np.asarray(x, dtype=np.int64)
    if kmode == _kernels.MODE_BCS:
        bad = (counts > 0) != (target > 0)
    elif kmode == _kernels.MODE_CAT:
        bad = np.minimum(counts, 2) != target
    else:
        bad = counts != target
    return tuple(int(j) for j in np.nonzero(bad)[0])


def _validate_loss(path_loss) -> np.ndarray:
    loss = np.asarray(path_loss, dtype=np.float64)
    if np.any((loss < 0.0) | (loss >= 1.0)):
        raise ConfigError("path loss rates must lie in [0, 1)")
    return loss


def _support_pool(routing, kmode, target, max_supports=MAX_SUPPORTS, seed=0):
    """Minimum-violation support patterns, capped for tractability.

    Beyond the exhaustive-scan limit, falls back to rejection sampling of
    feasible supports (approximate; flagged by the caller if empty). When
    more than max_supports patterns qualify, the sparsest (then lowest)
    patterns are kept, which favors few-congested-link explanations.
    """
    n_links = routing.shape[1]
    if n_links <= _kernels.MAX_EXHAUSTIVE_LINKS:
        patterns, viol = _kernels.min_violation_patterns(routing, kmode, target)
    else:
        rng = as_rng(seed)
        patterns = _kernels.sample_patterns(routing, kmode, target, 200_000, rng)
        viol = 0 if patterns.size else -1  # -1: nothing found, caller decides
    if patterns.size > max_supports:
        pc = np.array([bin(int(p)).count("1") for p in patterns])
        order = np.lexsort((patterns, pc))
        patterns = patterns[order[:max_supports]]
        patterns = np.sort(patterns)
    return patterns, viol


# ---------------------------------------------------------------------------
# CLINK: MAP weighted set cover
# ---------------------------------------------------------------------------


def _clink_greedy(routing, b_status, weights):
    """Greedy cover of congested paths by cost-effectiveness.

    Links on uncongested paths are forbidden. Allowed negative-weight links
    are always selected (they strictly lower the MAP objective); remaining
    congested paths are covered by the best new-coverage-per-weight pick,
    ties to the lower link id, followed by a redundancy prune of
    positive-weight picks.
    """
    r = np.asarray(routing, dtype=bool)
    b = np.asarray(b_status, dtype=bool)
    P, L = r.shape
    allowed = ~(r[~b].any(axis=0)) if (~b).any() else np.ones(L, dtype=bool)
    x = np.zeros(L, dtype=np.uint8)
    x[allowed & (weights < 0)] = 1
    congested = np.nonzero(b)[0]
    covered = r[:, x.astype(bool)].any(axis=1)
    while True:
        uncovered = [j for j in congested if not covered[j]]
        if not uncovered:
            break
        best_i, best_eff = -1, -np.inf
        for i in range(L):
            if not allowed[i] or x[i]:
                continue
            gain = sum(1 for j in uncovered if r[j, i])
            if gain == 0:
                continue
            eff = np.inf if weights[i] <= 0 else gain / weights[i]
            if eff > best_eff:
                best_i, best_eff = i, eff
        if best_i < 0:
            break  # remaining congested paths have no allowed link
        x[best_i] = 1
        covered |= r[:, best_i]
    # prune positive-weight picks that became redundant
    for i in sorted(np.nonzero(x)[0], key=lambda i: -weights[i]):
        if weights[i] <= 0:
            continue
        x[i] = 0
        still = r[:, x.astype(bool)].any(axis=1)
        if not all(still[j] for j in congested if covered[j]):
            x[i] = 1
    return x


def _repair(routing, x, kmode, target, weights, max_rounds=1000):
    """Single-bit flips that first reduce constraint violations, then cost."""
    r = np.asarray(routing, dtype=np.int64)
    x = x.copy()

    def viol(v):
        return len(_mismatched_paths(r, v, kmode, target))

    cur_v = viol(x)
    cur_c = float(weights @ x)
    for _ in range(max_rounds):
        best = None
        for i in range(x.shape[0]):
            y = x.copy()
            y[i] ^= 1
            vv = viol(y)
            cc = float(weights @ y)
            if vv < cur_v or (vv == cur_v and cc < cur_c - 1e-12):
                cand = (vv, cc, i)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, _, i = best
        x[i] ^= 1
        cur_v, cur_c = best[0], best[1]
    return x, cur_v


def clink(routing, b_status, priors: Priors, acs_mode: str = "none",
          acs=None) -> Diagnosis:
    """Boolean MAP diagnosis, optionally constrained by congestion labels."""
    r = np.asarray(routing, dtype=np.uint8)
    if r.shape[0] != len(b_status):
        raise ConfigError("one Boolean status per path required")
    w = priors.weights()
    if w.shape[0] != r.shape[1]:
        raise ConfigError("one prior per link required")
    kmode, target = _constraint(r, acs_mode, acs, b_status)
    if acs_mode == "none" or r.shape[1] > _kernels.MAX_EXHAUSTIVE_LINKS:
        x = _clink_greedy(r, np.asarray(b_status, dtype=bool), w)
        if acs_mode != "none":
            x, _ = _repair(r, x, kmode, target, w)
    else:
        pattern, _, _ = _kernels.map_select(r, kmode, target, w)
        x = _kernels.pattern_to_bits([pattern], r.shape[1])[0]
    violated = _mismatched_paths(r, x, kmode, target)
    return Diagnosis(
        x_hat=x.astype(np.uint8),
        objective=float(w @ x),
        infeasible=bool(violated),
        violated_paths=violated,
        mode=str(acs_mode),
        algorithm="clink",
    )


# ---------------------------------------------------------------------------
# Netscope: L1-regularized nonnegative least squares in the log domain
# ---------------------------------------------------------------------------


def netscope(routing, path_loss, acs_mode: str = "none", acs=None,
             lam: float = DEFAULT_LAMBDA, loss_threshold: float = LOSS_CONGESTED_THRESHOLD,
             max_sweeps: int = 10_000, tol: float = 1e-8) -> Diagnosis:
    """Sparse loss-rate inference; constrained runs re-fit on the best
    label-feasible support."""
    r = np.asarray(routing, dtype=np.float64)
    loss = _validate_loss(path_loss)
    if loss.shape[0] != r.shape[0]:
        raise ConfigError("one loss rate per path required")
    b = -np.log1p(-loss)
    if str(acs_mode).lower() == "none":
        z, sweeps, converged = _kernels.lasso_nn_cd(r, b, lam, max_sweeps, tol)
        z_loss = -np.expm1(-z)
        x = (z_loss > loss_threshold).astype(np.uint8)
        resid = float(((r @ z - b) ** 2).sum())
        return Diagnosis(x_hat=x, z_hat=z_loss, residual=resid,
                         converged=converged, objective=resid + lam * float(z.sum()),
                         mode="none", algorithm="netscope")
    kmode, target = _constraint(r, acs_mode, acs, None)
    patterns, viol = _support_pool(np.asarray(routing, dtype=np.uint8), kmode, target)
    if patterns.size == 0:
        d = netscope(routing, path_loss, "none", None, lam, loss_threshold,
                     max_sweeps, tol)
        d.infeasible = True
        d.violated_paths = _mismatched_paths(r, d.x_hat, kmode, target)
        d.mode = str(acs_mode)
        return d
    residuals, zfits = _kernels.nnls_scan(r, b, patterns)
    k = int(np.argmin(residuals))
    x = _kernels.pattern_to_bits([patterns[k]], r.shape[1])[0]
    z = zfits[k]
    violated = _mismatched_paths(r, x, kmode, target)
    return Diagnosis(
        x_hat=x.astype(np.uint8),
        z_hat=-np.expm1(-z),
        residual=float(residuals[k]),
        objective=float(residuals[k]),
        infeasible=viol != 0,
        violated_paths=violated,
        mode=str(acs_mode),
        algorithm="netscope",
    )


# ---------------------------------------------------------------------------
# Sum-Tomo: per-link ranges over feasible supports
# ---------------------------------------------------------------------------


def sumtomo(routing, path_loss, acs_mode: str = "none", acs=None,
            b_status=None, loss_threshold: float = LOSS_CONGESTED_THRESHOLD) -> Diagnosis:
    """Range inference over every feasible support.

    Unconstrained feasibility is the Boolean status (measured, or derived
    from path loss via the congestion threshold); constrained feasibility
    comes from the labels. The point estimate is the best-residual support's
    fit; ranges span the fitted values across supports.
    """
    r = np.asarray(routing, dtype=np.float64)
    loss = _validate_loss(path_loss)
    if loss.shape[0] != r.shape[0]:
        raise ConfigError("one loss rate per path required")
    b = -np.log1p(-loss)
    mode = str(acs_mode).lower()
    if mode == "none":
        if b_status is None:
            b_status = (loss > loss_threshold).astype(np.int64)
        kmode, target = _kernels.MODE_BCS, np.asarray(b_status, dtype=np.int64)
    else:
        kmode, target = _constraint(r, mode, acs, None)
    patterns, viol = _support_pool(np.asarray(routing, dtype=np.uint8), kmode, target)
    if patterns.size == 0:
        zero = np.zeros(r.shape[1])
        return Diagnosis(x_hat=zero.astype(np.uint8), z_hat=zero,
                         ranges=np.zeros((r.shape[1], 2)), infeasible=True,
                         violated_paths=tuple(range(r.shape[0])),
                         mode=mode, algorithm="sumtomo")
    residuals, zfits = _kernels.nnls_scan(r, b, patterns)
    k = int(np.argmin(residuals))
    member = _kernels.pattern_to_bits(patterns, r.shape[1]).astype(bool)
    n_links = r.shape[1]
    ranges = np.zeros((n_links, 2), dtype=np.float64)
    for i in range(n_links):
        vals = zfits[member[:, i], i]
        if vals.size:
            lo = float(vals.min()) if bool(member[:, i].all()) else 0.0
            ranges[i] = (lo, float(vals.max()))
    z = zfits[k]
    if mode == "none":
        x = ((-np.expm1(-z)) > loss_threshold).astype(np.uint8)
    else:
        x = member[k].astype(np.uint8)
    violated = _mismatched_paths(r, member[k].astype(np.uint8), kmode, target)
    return Diagnosis(
        x_hat=x,
        z_hat=-np.expm1(-z),
        ranges=-np.expm1(-ranges),
        residual=float(residuals[k]),
        objective=float(residuals[k]),
        infeasible=viol != 0,
        violated_paths=violated,
        mode=mode,
        algorithm="sumtomo",
    )


ALGORITHMS = {
    "clink": clink,
    "netscope": netscope,
    "sumtomo": sumtomo,
}


def diagnose(algorithm: str, routing, *, b_status=None, path_loss=None,
             priors: Optional[Priors] = None, acs_mode: str = "none", acs=None,
             lam: float = DEFAULT_LAMBDA) -> Diagnosis:
    """Uniform dispatcher used by the CLI."""
    algorithm = str(algorithm).lower()
    if algorithm == "clink":
        if priors is None:
            raise ConfigError("clink needs per-link priors")
        if b_status is None:
            if path_loss is None:
                raise ConfigError("clink needs the Boolean path status or path losses")
            b_status = (np.asarray(path_loss) > LOSS_CONGESTED_THRESHOLD).astype(np.int64)
        return clink(routing, b_status, priors, acs_mode, acs)
    if algorithm == "netscope":
        if path_loss is None:
            raise ConfigError("netscope needs per-path loss rates")
        return netscope(routing, path_loss, acs_mode, acs, lam=lam)
    if algorithm == "sumtomo":
        if path_loss is None:
            raise ConfigError("sumtomo needs per-path loss rates")
        return sumtomo(routing, path_loss, acs_mode, acs, b_status=b_status)
    raise ConfigError(f"unknown algorithm {algorithm!r}")
