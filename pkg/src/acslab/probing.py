"""Exponential-interval probing flows and per-window feature extraction.

One probing action sends M packets whose consecutive gaps are
alpha^(M-1), ..., alpha^2, alpha milliseconds, with alpha solved so the
action's average rate equals rate_ratio * path bandwidth. N actions per
scenario are spread evenly over the observed fraction of the scenario.

Each action yields one fixed-length feature window of 2M values:

    [delay_0 .. delay_{M-1}, gap_ratio_0 .. gap_ratio_{M-2}, loss_rate]

where delay is receive minus send time (ms), gap_ratio is the receive
interval over the send interval of consecutive delivered packets, and lost
packets leave a -1 sentinel in every slot they touch. Datasets are z-score
normalized per window column with the statistics stored in the file header,
so inference data can reuse training statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .acs import AcsLabel
from .errors import ConfigError, DatasetSchemaError
from .seeding import as_rng, derive_rng
from .simnet import GroundTruth, transmit
from .topology import Topology

LOST_SENTINEL = -1.0
DATASET_VERSION = 1

ALPHA_MAX = 1e6
ALPHA_REL_TOL = 1e-9


@dataclass(frozen=True)
class ProbeConfig:
    packets_per_action: int = 10   # M
    actions: int = 6               # N, the classifier's time steps
    packet_size_bytes: int = 100
    rate_ratio: float = 0.01
    duration_ratio: float = 0.40

    def validate(self):
        if self.packets_per_action < 2:
            raise ConfigError("need at least 2 packets per probing action")
        if self.actions < 1:
            raise ConfigError("need at least one probing action")
        if not 0.0 < self.rate_ratio <= 1.0:
            raise ConfigError(f"rate_ratio {self.rate_ratio} outside (0, 1]")
        if not 0.0 < self.duration_ratio <= 1.0:
            raise ConfigError(f"duration_ratio {self.duration_ratio} outside (0, 1]")
        if self.packet_size_bytes <= 0:
            raise ConfigError("packet size must be positive")

    @property
    def window_len(self) -> int:
        return 2 * self.packets_per_action


@dataclass
class PathSample:
    path_id: int
    windows: np.ndarray                 # (N, 2M), raw (unnormalized)
    label: Optional[AcsLabel] = None
    scenario_id: int = 0


def action_span_ms(cfg: ProbeConfig, bandwidth_mbps: float) -> float:
    """T_s: the action duration that hits the probe-rate cap exactly."""
    cfg.validate()
    if bandwidth_mbps <= 0:
        raise ConfigError("path bandwidth must be positive")
    bits = cfg.packets_per_action * cfg.packet_size_bytes * 8
    target_bps = cfg.rate_ratio * bandwidth_mbps * 1e6
    return 1000.0 * bits / target_bps


def solve_alpha(cfg: ProbeConfig, bandwidth_mbps: float) -> float:
    """Spacing base alpha > 1 with sum_{k=1..M-1} alpha^k = T_s (ms).

    Bisection until the geometric sum matches T_s to a relative tolerance
    well below 1e-9; no root in (1, 1e6] is a configuration error.
    """
    t_s = action_span_ms(cfg, bandwidth_mbps)
    m = cfg.packets_per_action

    def gap_sum(a: float) -> float:
        return sum(a ** k for k in range(1, m))

    if gap_sum(1.0) >= t_s:
        raise ConfigError(
            f"probe rate too high: {m} packets cannot be spread over {t_s:.6g} ms "
            "with alpha > 1; lower rate_ratio or packets_per_action"
        )
    lo, hi = 1.0, 2.0
    while gap_sum(hi) < t_s:
        hi *= 2.0
        if hi > ALPHA_MAX:
            raise ConfigError("no spacing base below 1e6 reaches the target rate")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap_sum(mid) < t_s:
            lo = mid
        else:
            hi = mid
        if abs(gap_sum(mid) - t_s) <= ALPHA_REL_TOL * t_s * 1e-3:
            break
    return 0.5 * (lo + hi)


def action_offsets_ms(cfg: ProbeConfig, alpha: float) -> np.ndarray:
    """Packet send offsets within one action: gaps alpha^(M-1), ..., alpha."""
    m = cfg.packets_per_action
    gaps = np.array([alpha ** k for k in range(m - 1, 0, -1)], dtype=np.float64)
    return np.concatenate([[0.0], np.cumsum(gaps)])


def schedule(cfg: ProbeConfig, bandwidth_mbps: float, duration_s: float):
    """Send times for all N actions: (starts, offsets, alpha).

    Actions start at k * span / N over the observed window; the layout is
    rejected when actions would overlap (N * T_s > observed span).
    """
    alpha = solve_alpha(cfg, bandwidth_mbps)
    offsets = action_offsets_ms(cfg, alpha)
    t_s = float(offsets[-1])
    span_ms = cfg.duration_ratio * duration_s * 1000.0
    if cfg.actions * t_s > span_ms:
        raise ConfigError(
            f"{cfg.actions} actions of {t_s:.3f} ms do not fit in "
            f"{span_ms:.3f} ms of observation"
        )
    starts = np.arange(cfg.actions, dtype=np.float64) * (span_ms / cfg.actions)
    return starts, offsets, alpha


def window_features(send_times: np.ndarray, events) -> np.ndarray:
    """One 2M feature window from a single action's packet events."""
    m = send_times.size
    feats = np.empty(2 * m, dtype=np.float64)
    rx = np.array([e.receive_time_ms if e.receive_time_ms is not None else np.nan
                   for e in events])
    delays = rx - send_times
    lost = np.isnan(rx)
    feats[:m] = np.where(lost, LOST_SENTINEL, delays)
    for i in range(m - 1):
        if lost[i] or lost[i + 1]:
            feats[m + i] = LOST_SENTINEL
        else:
            feats[m + i] = (rx[i + 1] - rx[i]) / (send_times[i + 1] - send_times[i])
    feats[2 * m - 1] = lost.mean()
    return feats


def probe_path(gt: GroundTruth, topology: Topology, path_id: int,
               cfg: ProbeConfig, seed, scenario_id: int = 0) -> PathSample:
    """Probe one path for a whole period: N actions -> N raw feature windows."""
    starts, offsets, _ = schedule(cfg, gt.path_bandwidth(path_id), gt.duration_s)
    rng = as_rng(seed, path_id)
    windows = np.empty((cfg.actions, cfg.window_len), dtype=np.float64)
    for w, start in enumerate(starts):
        send = start + offsets
        events = transmit(gt, path_id, send, rng)
        windows[w] = window_features(send, events)
    return PathSample(path_id=path_id, windows=windows, scenario_id=scenario_id)


def probe_all_paths(gt: GroundTruth, cfg: ProbeConfig, seed, scenario_id: int = 0):
    """PathSample per path, with per-path derived streams."""
    topo = gt.topology
    return [probe_path(gt, topo, pid, cfg, seed, scenario_id=scenario_id)
            for pid in range(topo.n_paths)]


def measured_loss(sample: PathSample) -> float:
    """Pooled probe loss fraction over the sample's windows."""
    return float(sample.windows[:, -1].mean())


def normalization_stats(samples):
    """Per-column mean/std over every window of the dataset (std 0 -> 1)."""
    stacked = np.concatenate([s.windows for s in samples], axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return mean, std


def export_dataset(samples, with_labels: bool, path, *,
                   topology_name: str = "", regime: str = "homogeneous",
                   stats=None, path_hops=None) -> int:
    """Write PathSamples as JSON lines behind a header record.

    The header carries the layout, the normalization statistics applied to
    every window, and (when given) the hop count per path id so consumers
    can bucket results by path length. Pass ``stats`` to normalize with an
    existing dataset's statistics (inference exports reuse the training
    stats). Returns the number of sample records written.
    """
    samples = list(samples)
    if samples:
        shapes = {s.windows.shape for s in samples}
        if len(shapes) != 1:
            raise DatasetSchemaError(f"inhomogeneous window shapes: {sorted(shapes)}")
        n_actions, window_len = samples[0].windows.shape
    else:
        n_actions, window_len = 0, 0
    if stats is None and samples:
        mean, std = normalization_stats(samples)
    elif stats is not None:
        mean, std = (np.asarray(stats[0], dtype=np.float64),
                     np.asarray(stats[1], dtype=np.float64))
    else:
        mean, std = np.zeros(0), np.ones(0)
    header = {
        "record": "header",
        "version": DATASET_VERSION,
        "topology": topology_name,
        "regime": regime,
        "actions": n_actions,
        "window_len": window_len,
        "with_labels": bool(with_labels),
        "feature_mean": [float(v) for v in mean],
        "feature_std": [float(v) for v in std],
    }
    if path_hops is not None:
        header["path_hops"] = [int(h) for h in path_hops]
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for s in samples:
            norm = (s.windows - mean) / std
            rec = {
                "record": "sample",
                "scenario_id": int(s.scenario_id),
                "path_id": int(s.path_id),
                "windows": [[float(v) for v in row] for row in norm],
            }
            if with_labels:
                if s.label is None:
                    raise DatasetSchemaError(
                        f"sample (scenario {s.scenario_id}, path {s.path_id}) has no label"
                    )
                rec["label_plus"] = int(s.label.plus)
                rec["label_cat"] = int(s.label.cat)
            fh.write(json.dumps(rec) + "\n")
            count += 1
    return count


def import_dataset(path):
    """Read a dataset file back: (header, list of record dicts).

    Window values come back exactly as written (shortest-round-trip floats),
    still normalized; use the header stats to undo if needed.
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise DatasetSchemaError("empty dataset file")
        header = json.loads(first)
        if header.get("record") != "header":
            raise DatasetSchemaError("first record must be the header")
        records = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("record") != "sample":
                raise DatasetSchemaError(f"line {line_no}: unexpected record type")
            rec["windows"] = np.asarray(rec["windows"], dtype=np.float64)
            if rec["windows"].shape != (header["actions"], header["window_len"]):
                raise DatasetSchemaError(f"line {line_no}: window shape mismatch")
            records.append(rec)
    return header, records


def export_packet_events_csv(events, path) -> int:
    """Raw per-packet dump for debugging."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "index", "send_time_ms", "receive_time_ms", "lost"])
        n = 0
        for e in events:
            w.writerow([e.path_id, e.index, repr(e.send_time_ms),
                        "" if e.lost else repr(e.receive_time_ms), int(e.lost)])
            n += 1
    return n
