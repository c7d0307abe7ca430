"""End-to-end experiment pipelines.

``run_alacs`` drives the full loop for a grid of congestion probabilities:
sample a scenario, probe every path, obtain labels from the configured
source, run each diagnosis algorithm unconstrained and constrained, and
score against the ground truth. ``sweep_probe`` grids over probe settings
and exports one training dataset per cell. ``fig3a_gap`` reports the
solution-space distance comparison. All outputs are plain dict/rows so the
CLI can render CSV/JSON bytes deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .classify import LabelSource, labels_for, load_predictions, threshold_labels
from .errors import ConfigError
from .probing import ProbeConfig, export_dataset, measured_loss, probe_all_paths
from .simnet import GroundTruth, ScenarioConfig, sample_ground_truth
from .acs import mean_distance_gap, path_labels
from .tomography import (
    LOSS_CONGESTED_THRESHOLD,
    DEFAULT_LAMBDA,
    Priors,
    diagnose,
)
from .topology import load_topology

REPORT_VERSION = 1

DEFAULT_P_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))

#: Linear factor mapping a link's total probe load (sum of rate ratios of
#: the paths crossing it) to extra loss, used by the probe-setting sweep.
INTRUSION_COEFF = 0.2


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "ERNET"
    regime: str = "homogeneous"
    p_grid: tuple = DEFAULT_P_GRID
    repetitions: int = 40
    master_seed: int = 7
    duration_s: float = 300.0
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    labels: LabelSource = field(default_factory=LabelSource)
    algorithms: tuple = ("clink", "netscope", "sumtomo")
    modes: tuple = ("none", "cat", "plus")
    lam: float = DEFAULT_LAMBDA

    def validate(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if not self.p_grid:
            raise ConfigError("empty congestion probability grid")
        for p in self.p_grid:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"congestion probability {p} outside [0, 1]")
        for a in self.algorithms:
            if a not in ("clink", "netscope", "sumtomo"):
                raise ConfigError(f"unknown algorithm {a!r}")
        for m in self.modes:
            if m not in ("none", "cat", "plus"):
                raise ConfigError(f"unknown mode {m!r}")
        self.probe.validate()
        self.labels.validate()

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        known = {}
        if "probe" in doc:
            known["probe"] = ProbeConfig(**doc.pop("probe"))
        if "labels" in doc:
            known["labels"] = LabelSource(**doc.pop("labels"))
        for key in ("p_grid", "algorithms", "modes"):
            if key in doc:
                known[key] = tuple(doc.pop(key))
        allowed = {"topology", "regime", "repetitions", "master_seed",
                   "duration_s", "lam"}
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        known.update(doc)
        cfg = cls(**known)
        cfg.validate()
        return cfg


def run_scenario(topo, p, regime, duration_s, probe_cfg, scenario_seed, probe_seed,
                 scenario_id=0):
    """Simulate and probe one scenario; returns (gt, samples, path_loss, b_meas)."""
    cfg = ScenarioConfig(topology=topo.name, congestion_prob=p, regime=regime,
                         rng_seed=scenario_seed, duration_s=duration_s)
    gt = sample_ground_truth(cfg, topology=topo)
    samples = probe_all_paths(gt, probe_cfg, probe_seed, scenario_id=scenario_id)
    path_loss = np.array([measured_loss(s) for s in samples])
    b_meas = (path_loss > LOSS_CONGESTED_THRESHOLD).astype(np.int64)
    return gt, samples, path_loss, b_meas


def score_diagnosis(gt: GroundTruth, diag):
    truth = gt.congested.astype(np.uint8)
    row = {
        "precision": metrics.precision(truth, diag.x_hat),
        "recall": metrics.recall(truth, diag.x_hat),
        "f1": metrics.f1(truth, diag.x_hat),
        "infeasible": int(diag.infeasible),
    }
    if diag.z_hat is not None:
        row["nrmse"] = metrics.nrmse(gt.loss_rate, diag.z_hat)
    else:
        row["nrmse"] = math.nan
    return row


def run_alacs(cfg: ExperimentConfig, progress=None) -> dict:
    """Full experiment grid; returns the report document."""
    cfg.validate()
    topo = load_topology(cfg.topology)
    preds = load_predictions(cfg.labels.path) if cfg.labels.kind == "external" else None
    cells = {(p, a, m): [] for p in cfg.p_grid for a in cfg.algorithms for m in cfg.modes}
    for pi, p in enumerate(cfg.p_grid):
        priors = Priors.uniform(p, topo.n_links)
        for rep in range(cfg.repetitions):
            sid = pi * cfg.repetitions + rep
            gt, _, path_loss, b_meas = run_scenario(
                topo, p, cfg.regime, cfg.duration_s, cfg.probe,
                scenario_seed=(cfg.master_seed, 0, pi, rep),
                probe_seed=(cfg.master_seed, 1, pi, rep),
                scenario_id=sid,
            )
            labels = labels_for(gt, cfg.labels, path_loss=path_loss,
                                scenario_id=sid, predictions=preds)
            for a in cfg.algorithms:
                for m in cfg.modes:
                    d = diagnose(a, topo.routing, b_status=b_meas,
                                 path_loss=path_loss, priors=priors,
                                 acs_mode=m, acs=labels, lam=cfg.lam)
                    cells[(p, a, m)].append(score_diagnosis(gt, d))
            if progress is not None:
                progress(sid)
    rows = []
    for (p, a, m), scores in cells.items():
        row = {
            "topology": cfg.topology, "regime": cfg.regime, "p": p,
            "algorithm": a, "mode": m, "n_reps": len(scores),
        }
        for key in ("precision", "recall", "f1"):
            vals = np.array([s[key] for s in scores])
            row[f"{key}_mean"] = float(vals.mean())
            row[f"{key}_std"] = float(vals.std())
        nr = np.array([s["nrmse"] for s in scores])
        ok = ~np.isnan(nr)
        row["nrmse_mean"] = float(nr[ok].mean()) if ok.any() else math.nan
        row["nrmse_std"] = float(nr[ok].std()) if ok.any() else math.nan
        row["nrmse_n"] = int(ok.sum())
        row["infeasible_count"] = int(sum(s["infeasible"] for s in scores))
        rows.append(row)
    return {
        "report_version": REPORT_VERSION,
        "kind": "alacs",
        "convention_version": metrics.CONVENTION_VERSION,
        "config": config_echo(cfg),
        "rows": rows,
    }


def config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "topology": cfg.topology,
        "regime": cfg.regime,
        "p_grid": list(cfg.p_grid),
        "repetitions": cfg.repetitions,
        "master_seed": cfg.master_seed,
        "duration_s": cfg.duration_s,
        "probe": vars(cfg.probe).copy(),
        "labels": {"kind": cfg.labels.kind, "error_rate": cfg.labels.error_rate,
                   "seed": cfg.labels.seed, "path": cfg.labels.path},
        "algorithms": list(cfg.algorithms),
        "modes": list(cfg.modes),
        "lam": cfg.lam,
    }


def apply_probe_load(gt: GroundTruth, rate_ratio: float,
                     coeff: float = INTRUSION_COEFF) -> GroundTruth:
    """Model probe intrusiveness: every path's probe stream adds load to its
    links, linearly raising their loss rates."""
    topo = gt.topology
    per_link_paths = topo.routing.sum(axis=0).astype(np.float64)
    extra = coeff * rate_ratio * per_link_paths
    bumped = np.clip(gt.loss_rate + extra, 0.0, 0.999)
    return replace_loss(gt, bumped)


def replace_loss(gt: GroundTruth, loss: np.ndarray) -> GroundTruth:
    return GroundTruth(
        topology=gt.topology, congested=gt.congested, loss_rate=loss,
        queue_delay_mean_ms=gt.queue_delay_mean_ms, link_delay_ms=gt.link_delay_ms,
        link_bandwidth_mbps=gt.link_bandwidth_mbps, duration_s=gt.duration_s,
        regime=gt.regime, seed=gt.seed,
    )


@dataclass(frozen=True)
class SweepConfig:
    topology: str = "ERNET"
    regime: str = "homogeneous"
    p: float = 0.3
    scenarios: int = 20
    master_seed: int = 7
    duration_s: float = 300.0
    rate_ratios: tuple = (0.01,)
    actions: tuple = (6,)
    duration_ratios: tuple = (0.4,)
    packets_per_action: int = 10
    intrusion_coeff: float = INTRUSION_COEFF

    def validate(self):
        if self.scenarios < 1:
            raise ConfigError("need at least one scenario per sweep cell")
        if not (self.rate_ratios and self.actions and self.duration_ratios):
            raise ConfigError("empty sweep grid")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"congestion probability {self.p} outside [0, 1]")

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        doc = dict(doc)
        known = {}
        for key in ("rate_ratios", "actions", "duration_ratios"):
            if key in doc:
                known[key] = tuple(doc.pop(key))
        allowed = {"topology", "regime", "p", "scenarios", "master_seed",
                   "duration_s", "packets_per_action", "intrusion_coeff"}
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigError(f"unknown sweep fields: {sorted(unknown)}")
        known.update(doc)
        cfg = cls(**known)
        cfg.validate()
        return cfg


def sweep_probe(cfg: SweepConfig, out_dir) -> dict:
    """Grid over probe settings; per cell, export a labeled dataset and score
    the threshold baseline as a learner-free proxy."""
    from pathlib import Path

    cfg.validate()
    topo = load_topology(cfg.topology)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for rr in cfg.rate_ratios:
        for n_act in cfg.actions:
            for dr in cfg.duration_ratios:
                probe_cfg = ProbeConfig(
                    packets_per_action=cfg.packets_per_action, actions=int(n_act),
                    rate_ratio=float(rr), duration_ratio=float(dr),
                )
                probe_cfg.validate()
                all_samples = []
                correct = 0
                total = 0
                loss_sum = 0.0
                for sc in range(cfg.scenarios):
                    scen_cfg = ScenarioConfig(
                        topology=topo.name, congestion_prob=cfg.p, regime=cfg.regime,
                        rng_seed=(cfg.master_seed, 0, sc), duration_s=cfg.duration_s)
                    gt = sample_ground_truth(scen_cfg, topology=topo)
                    loaded = apply_probe_load(gt, float(rr), cfg.intrusion_coeff)
                    samples = probe_all_paths(loaded, probe_cfg,
                                              (cfg.master_seed, 1, sc), scenario_id=sc)
                    truth = path_labels(topo.routing, gt.congested.astype(np.uint8))
                    path_loss = [measured_loss(s) for s in samples]
                    guess = threshold_labels(path_loss)
                    for s, lab in zip(samples, truth):
                        s.label = lab
                    correct += sum(int(g.cat == t.cat) for g, t in zip(guess, truth))
                    total += len(truth)
                    loss_sum += float(np.mean(path_loss))
                    all_samples.extend(samples)
                name = f"sweep_rr{rr}_n{n_act}_dr{dr}.jsonl"
                out_file = out_dir / name
                count = export_dataset(all_samples, True, out_file,
                                       topology_name=cfg.topology, regime=cfg.regime,
                                       path_hops=topo.hop_counts())
                rows.append({
                    "rate_ratio": float(rr), "actions": int(n_act),
                    "duration_ratio": float(dr), "records": count,
                    "threshold_cat_accuracy": correct / total,
                    "mean_path_loss": loss_sum / cfg.scenarios,
                    "dataset": name,
                })
    return {
        "report_version": REPORT_VERSION,
        "kind": "sweep",
        "config": {
            "topology": cfg.topology, "regime": cfg.regime, "p": cfg.p,
            "scenarios": cfg.scenarios, "master_seed": cfg.master_seed,
            "intrusion_coeff": cfg.intrusion_coeff,
        },
        "rows": rows,
    }


def fig3a_gap(topology_name: str, p: float, trials: int, seed: int) -> dict:
    """Mean distance-to-truth of category-feasible vs Boolean-only solutions."""
    topo = load_topology(topology_name)
    mean_acs, mean_only = mean_distance_gap(topo, p, trials, seed)
    verdict = "acs_closer" if (not math.isnan(mean_only) and mean_acs < mean_only) \
        else "inconclusive"
    return {
        "report_version": REPORT_VERSION,
        "kind": "fig3a",
        "topology": topology_name, "p": p, "trials": trials, "seed": seed,
        "mean_distance_acs": mean_acs,
        "mean_distance_bcs_only": mean_only,
        "verdict": verdict,
    }
