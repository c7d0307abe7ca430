"""Uniform providers of per-path congestion labels.

Four sources behind one call:

* ``oracle``            exact labels from the scenario's link states;
* ``oracle_noisy``      oracle labels independently corrupted per path with
                        probability ``error_rate`` (category resampled from
                        the other two classes, count shifted by +-1 and
                        clamped to [0, hops]);
* ``threshold``         non-learned baseline on the measured probe loss:
                        below 1% none, below 4% single, else multiple;
* ``external``          predictions produced elsewhere (e.g. the trainer),
                        read from JSON lines {scenario_id, path_id,
                        pred_cat, pred_plus}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .acs import AcsLabel, acs_cat, acs_plus
from .errors import ConfigError, DatasetSchemaError
from .seeding import derive_rng
from .simnet import GroundTruth

THRESHOLD_NONE = 0.01
THRESHOLD_SINGLE = 0.04

KINDS = ("oracle", "oracle_noisy", "threshold", "external")


@dataclass(frozen=True)
class LabelSource:
    kind: str = "oracle"
    error_rate: float = 0.0
    seed: int = 0
    path: Optional[str] = None

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown label source {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ConfigError(f"error rate {self.error_rate} outside [0, 1]")
        if self.kind == "external" and not self.path:
            raise ConfigError("external label source needs a prediction file path")


def oracle_labels(gt: GroundTruth):
    plus = acs_plus(gt.topology.routing, gt.congested.astype(np.uint8))
    return [AcsLabel.from_plus(p) for p in plus]


def corrupt_labels(labels, hops, error_rate: float, rng):
    """Independent per-path corruption; the same Bernoulli event flips both
    the category (resampled from the other two classes) and the count
    (shifted one step, clamped to the path's hop count)."""
    out = []
    for label, h in zip(labels, hops):
        if rng.random() >= error_rate:
            out.append(label)
            continue
        others = [c for c in (0, 1, 2) if c != label.cat]
        cat = int(others[rng.integers(0, 2)])
        step = 1 if rng.random() < 0.5 else -1
        plus = int(np.clip(label.plus + step, 0, int(h)))
        out.append(AcsLabel(plus=plus, cat=cat))
    return out


def threshold_labels(path_loss):
    """Loss-rate cut points: <1% none, <4% single, else multiple."""
    out = []
    for loss in np.asarray(path_loss, dtype=np.float64):
        if loss < THRESHOLD_NONE:
            cat = 0
        elif loss < THRESHOLD_SINGLE:
            cat = 1
        else:
            cat = 2
        out.append(AcsLabel(plus=cat, cat=cat))
    return out


def load_predictions(path):
    """Prediction file -> {(scenario_id, path_id): AcsLabel}."""
    preds = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            try:
                key = (int(rec["scenario_id"]), int(rec["path_id"]))
                cat = int(rec["pred_cat"])
                plus = int(rec["pred_plus"])
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetSchemaError(f"line {line_no}: bad prediction record ({exc})")
            if cat not in (0, 1, 2) or plus < 0:
                raise DatasetSchemaError(f"line {line_no}: prediction out of range")
            preds[key] = AcsLabel(plus=plus, cat=cat)
    return preds


def labels_for(gt: GroundTruth, source: LabelSource, *,
               path_loss=None, scenario_id: int = 0, predictions=None):
    """Per-path AcsLabel list for one scenario.

    ``path_loss`` is required by the threshold source; ``predictions``
    (preloaded dict) or ``source.path`` by the external source. Noisy oracle
    streams are derived from (source.seed, scenario_id) so scenarios stay
    independent and reproducible.
    """
    source.validate()
    topo = gt.topology
    if source.kind == "oracle":
        return oracle_labels(gt)
    if source.kind == "oracle_noisy":
        rng = derive_rng(source.seed, scenario_id)
        return corrupt_labels(oracle_labels(gt), topo.hop_counts(),
                              source.error_rate, rng)
    if source.kind == "threshold":
        if path_loss is None:
            raise ConfigError("threshold label source needs measured path losses")
        if len(path_loss) != topo.n_paths:
            raise ConfigError("one measured loss per path required")
        return threshold_labels(path_loss)
    preds = predictions if predictions is not None else load_predictions(source.path)
    out = []
    for pid in range(topo.n_paths):
        key = (int(scenario_id), pid)
        if key not in preds:
            raise DatasetSchemaError(
                f"prediction file misses scenario {scenario_id} path {pid}"
            )
        out.append(preds[key])
    return out
