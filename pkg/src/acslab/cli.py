"""Command-line front end.

Subcommands::

    acslab topo show <name>           fixture/file summary (+ routing matrix)
    acslab simulate ...               one scenario's ground truth as JSON
    acslab probe export ...           scenarios -> JSONL dataset for training
    acslab labels ...                 per-path labels from any source as JSONL
    acslab diagnose ...               run one algorithm on one scenario
    acslab alacs run <config>         the full experiment grid -> CSV/JSON
    acslab sweep <config>             probe-setting grid -> datasets + CSV
    acslab fig3a ...                  solution-space distance comparison

All outputs are deterministic for a fixed config and seed (byte-identical
files on repeat runs). Exit status is 1 on validation errors, 0 otherwise;
infeasible constraint sets are reported inside the outputs, never fatal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import LabelSource, labels_for
from .errors import AcslabError
from .experiment import (
    ExperimentConfig,
    SweepConfig,
    fig3a_gap,
    run_alacs,
    run_scenario,
    sweep_probe,
)
from .probing import ProbeConfig, export_dataset, measured_loss, probe_all_paths
from .simnet import ScenarioConfig, path_ground_truth_labels, sample_ground_truth
from .tomography import Priors, diagnose
from .topology import fixture_names, load_topology


def _write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _rows_to_csv(rows, columns) -> str:
    def cell(v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _probe_config(args) -> ProbeConfig:
    return ProbeConfig(
        packets_per_action=args.packets,
        actions=args.actions,
        packet_size_bytes=args.packet_size,
        rate_ratio=args.rate_ratio,
        duration_ratio=args.duration_ratio,
    )


def _add_probe_flags(sp):
    sp.add_argument("--packets", type=int, default=10, help="packets per action (M)")
    sp.add_argument("--actions", type=int, default=6, help="actions per period (N)")
    sp.add_argument("--packet-size", type=int, default=100, help="probe size, bytes")
    sp.add_argument("--rate-ratio", type=float, default=0.01,
                    help="probe rate as a fraction of path bandwidth")
    sp.add_argument("--duration-ratio", type=float, default=0.40,
                    help="observed fraction of the scenario")


def _add_scenario_flags(sp):
    sp.add_argument("--topology", default="ERNET",
                    help=f"fixture name ({', '.join(fixture_names())}) or file path")
    sp.add_argument("--p", type=float, default=0.3, help="link congestion probability")
    sp.add_argument("--regime", choices=("homogeneous", "heterogeneous"),
                    default="homogeneous")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--duration", type=float, default=300.0, help="scenario seconds")


def cmd_topo_show(args) -> int:
    topo = load_topology(args.name)
    doc = {
        "name": topo.name,
        "nodes": len(topo.nodes),
        "links": topo.n_links,
        "paths": topo.n_paths,
        "mean_hops": topo.mean_hops(),
        "hop_counts": topo.hop_counts().tolist(),
    }
    if args.json:
        doc["routing"] = topo.routing.tolist()
        print(_json_text(doc), end="")
        return 0
    print(f"{topo.name}: {doc['paths']} paths, {doc['links']} links, "
          f"{len(topo.nodes)} nodes, mean hops {doc['mean_hops']:.3f}")
    print("routing matrix (paths x links):")
    for j in range(topo.n_paths):
        print("  " + "".join(str(int(v)) for v in topo.routing[j]))
    return 0


def cmd_simulate(args) -> int:
    topo = load_topology(args.topology)
    cfg = ScenarioConfig(topology=args.topology, congestion_prob=args.p,
                         regime=args.regime, rng_seed=args.seed,
                         duration_s=args.duration)
    gt = sample_ground_truth(cfg, topology=topo)
    plus, cat, b = path_ground_truth_labels(gt)
    doc = {
        "topology": topo.name,
        "regime": gt.regime,
        "seed": args.seed,
        "duration_s": gt.duration_s,
        "congested": gt.congested.astype(int).tolist(),
        "loss_rate": gt.loss_rate.tolist(),
        "queue_delay_mean_ms": gt.queue_delay_mean_ms.tolist(),
        "link_delay_ms": gt.link_delay_ms.tolist(),
        "link_bandwidth_mbps": gt.link_bandwidth_mbps.tolist(),
        "path_plus": plus.tolist(),
        "path_cat": cat.tolist(),
        "path_boolean": b.astype(int).tolist(),
    }
    text = _json_text(doc)
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_probe_export(args) -> int:
    topo = load_topology(args.topology)
    probe_cfg = _probe_config(args)
    probe_cfg.validate()
    stats = None
    if args.stats_from:
        from .probing import import_dataset

        header, _ = import_dataset(args.stats_from)
        stats = (np.asarray(header["feature_mean"]), np.asarray(header["feature_std"]))
    all_samples = []
    for sc in range(args.scenarios):
        cfg = ScenarioConfig(topology=args.topology, congestion_prob=args.p,
                             regime=args.regime, rng_seed=(args.seed, 0, sc),
                             duration_s=args.duration)
        gt = sample_ground_truth(cfg, topology=topo)
        samples = probe_all_paths(gt, probe_cfg, (args.seed, 1, sc), scenario_id=sc)
        if args.labels:
            from .acs import path_labels

            for s, lab in zip(samples, path_labels(topo.routing,
                                                   gt.congested.astype(np.uint8))):
                s.label = lab
        all_samples.extend(samples)
    count = export_dataset(all_samples, args.labels, args.out,
                           topology_name=topo.name, regime=args.regime, stats=stats,
                           path_hops=topo.hop_counts())
    print(f"wrote {count} records to {args.out}")
    return 0


def cmd_labels(args) -> int:
    topo = load_topology(args.topology)
    source = LabelSource(kind=args.source, error_rate=args.error_rate,
                         seed=args.label_seed, path=args.predictions)
    lines = []
    for sc in range(args.scenarios):
        cfg = ScenarioConfig(topology=args.topology, congestion_prob=args.p,
                             regime=args.regime, rng_seed=(args.seed, 0, sc),
                             duration_s=args.duration)
        gt = sample_ground_truth(cfg, topology=topo)
        path_loss = None
        if args.source == "threshold":
            probe_cfg = _probe_config(args)
            samples = probe_all_paths(gt, probe_cfg, (args.seed, 1, sc), scenario_id=sc)
            path_loss = [measured_loss(s) for s in samples]
        labels = labels_for(gt, source, path_loss=path_loss, scenario_id=sc)
        for pid, lab in enumerate(labels):
            lines.append(json.dumps({"scenario_id": sc, "path_id": pid,
                                     "pred_cat": lab.cat, "pred_plus": lab.plus}))
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.scenarios * topo.n_paths} labels to {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_diagnose(args) -> int:
    topo = load_topology(args.topology)
    if args.measurements:
        doc = json.loads(Path(args.measurements).read_text(encoding="utf-8"))
        path_loss = np.asarray(doc["path_loss"], dtype=np.float64)
        b_status = np.asarray(doc.get("b_status",
                                      (path_loss > 0.01).astype(int)), dtype=np.int64)
        gt = None
    else:
        probe_cfg = _probe_config(args)
        gt, _, path_loss, b_status = run_scenario(
            topo, args.p, args.regime, args.duration, probe_cfg,
            scenario_seed=(args.seed, 0, 0), probe_seed=(args.seed, 1, 0))
    labels = None
    if args.mode != "none":
        if args.labels_file:
            source = LabelSource(kind="external", path=args.labels_file)
            labels = labels_for(gt, source, scenario_id=0) if gt is not None else None
            if labels is None:
                from .classify import load_predictions

                preds = load_predictions(args.labels_file)
                labels = [preds[(0, pid)] for pid in range(topo.n_paths)]
        elif gt is not None:
            labels = labels_for(gt, LabelSource(kind="oracle"))
        else:
            raise AcslabError("constrained mode needs --labels-file when "
                              "measurements come from a file")
    priors = Priors.uniform(args.prior, topo.n_links)
    d = diagnose(args.algorithm, topo.routing, b_status=b_status,
                 path_loss=path_loss, priors=priors, acs_mode=args.mode,
                 acs=labels, lam=args.lam)
    text = d.to_json() + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    if gt is not None:
        from . import metrics

        truth = gt.congested.astype(np.uint8)
        print(f"# truth   {''.join(str(int(v)) for v in truth)}", file=sys.stderr)
        print(f"# x_hat   {''.join(str(int(v)) for v in d.x_hat)}  "
              f"f1={metrics.f1(truth, d.x_hat):.3f}", file=sys.stderr)
    return 0


ALACS_CSV_COLUMNS = [
    "topology", "regime", "p", "algorithm", "mode", "n_reps",
    "precision_mean", "precision_std", "recall_mean", "recall_std",
    "f1_mean", "f1_std", "nrmse_mean", "nrmse_std", "nrmse_n",
    "infeasible_count",
]


def summary_text(report: dict) -> str:
    cfg = report["config"]
    out = [
        f"alacs report v{report['report_version']} "
        f"(metric conventions v{report['convention_version']})",
        f"topology={cfg['topology']} regime={cfg['regime']} "
        f"reps={cfg['repetitions']} seed={cfg['master_seed']} "
        f"labels={cfg['labels']['kind']}",
        "",
        f"{'p':>4} {'algorithm':>9} {'mode':>5} {'precision':>10} "
        f"{'recall':>10} {'f1':>10} {'nrmse':>10} {'infeas':>6}",
    ]
    for row in report["rows"]:
        out.append(
            f"{row['p']:>4} {row['algorithm']:>9} {row['mode']:>5} "
            f"{row['precision_mean']:>10.4f} {row['recall_mean']:>10.4f} "
            f"{row['f1_mean']:>10.4f} {row['nrmse_mean']:>10.4f} "
            f"{row['infeasible_count']:>6}"
        )
    return "\n".join(out) + "\n"


def cmd_alacs_run(args) -> int:
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    cfg = ExperimentConfig.from_dict(doc)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run_alacs(cfg)
    _write_text(out_dir / "report.csv", _rows_to_csv(report["rows"], ALACS_CSV_COLUMNS))
    _write_text(out_dir / "report.json", _json_text(report))
    text = summary_text(report)
    _write_text(out_dir / "summary.txt", text)
    print(text, end="")
    print(f"wrote {out_dir}/report.csv, report.json, summary.txt")
    return 0


SWEEP_CSV_COLUMNS = ["rate_ratio", "actions", "duration_ratio", "records",
                     "threshold_cat_accuracy", "mean_path_loss", "dataset"]


def cmd_sweep(args) -> int:
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    cfg = SweepConfig.from_dict(doc)
    out_dir = Path(args.out_dir)
    report = sweep_probe(cfg, out_dir)
    _write_text(out_dir / "sweep.csv", _rows_to_csv(report["rows"], SWEEP_CSV_COLUMNS))
    _write_text(out_dir / "sweep.json", _json_text(report))
    for row in report["rows"]:
        print(f"rr={row['rate_ratio']} N={row['actions']} dr={row['duration_ratio']}: "
              f"threshold acc {row['threshold_cat_accuracy']:.3f}, "
              f"mean path loss {row['mean_path_loss']:.4f} -> {row['dataset']}")
    print(f"wrote {out_dir}/sweep.csv")
    return 0


def cmd_fig3a(args) -> int:
    doc = fig3a_gap(args.topology, args.p, args.trials, args.seed)
    if args.json:
        print(_json_text(doc), end="")
        return 0
    print(f"{doc['topology']} p={doc['p']} trials={doc['trials']}: "
          f"mean distance ACS-feasible {doc['mean_distance_acs']:.4f} vs "
          f"BCS-only {doc['mean_distance_bcs_only']:.4f} -> {doc['verdict']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acslab",
                                 description="network tomography lab with additive "
                                             "congestion status labels")
    ap.add_argument("--version", action="version", version=f"acslab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    topo = sub.add_parser("topo", help="topology utilities")
    topo_sub = topo.add_subparsers(dest="subcommand", required=True)
    show = topo_sub.add_parser("show", help="summarize a fixture or file")
    show.add_argument("name")
    show.add_argument("--json", action="store_true")
    show.set_defaults(fn=cmd_topo_show)

    sim = sub.add_parser("simulate", help="sample one scenario's ground truth")
    _add_scenario_flags(sim)
    sim.add_argument("--out", default=None)
    sim.set_defaults(fn=cmd_simulate)

    probe = sub.add_parser("probe", help="probing utilities")
    probe_sub = probe.add_subparsers(dest="subcommand", required=True)
    pexp = probe_sub.add_parser("export", help="probe scenarios into a JSONL dataset")
    _add_scenario_flags(pexp)
    _add_probe_flags(pexp)
    pexp.add_argument("--scenarios", type=int, default=1)
    pexp.add_argument("--out", required=True)
    pexp.add_argument("--labels", action=argparse.BooleanOptionalAction, default=True,
                      help="attach oracle labels (disable for inference exports)")
    pexp.add_argument("--stats-from", default=None,
                      help="normalize with the stats of an existing dataset")
    pexp.set_defaults(fn=cmd_probe_export)

    lab = sub.add_parser("labels", help="emit per-path labels from any source")
    _add_scenario_flags(lab)
    _add_probe_flags(lab)
    lab.add_argument("--scenarios", type=int, default=1)
    lab.add_argument("--source", choices=("oracle", "oracle_noisy", "threshold",
                                          "external"), default="oracle")
    lab.add_argument("--error-rate", type=float, default=0.0)
    lab.add_argument("--label-seed", type=int, default=0)
    lab.add_argument("--predictions", default=None, help="external prediction file")
    lab.add_argument("--out", default=None)
    lab.set_defaults(fn=cmd_labels)

    diag = sub.add_parser("diagnose", help="run one diagnosis algorithm")
    _add_scenario_flags(diag)
    _add_probe_flags(diag)
    diag.add_argument("--algorithm", choices=("clink", "netscope", "sumtomo"),
                      required=True)
    diag.add_argument("--mode", choices=("none", "cat", "plus"), default="none")
    diag.add_argument("--measurements", default=None,
                      help="JSON file with path_loss (and optional b_status)")
    diag.add_argument("--labels-file", default=None,
                      help="external label JSONL for constrained modes")
    diag.add_argument("--prior", type=float, default=0.2)
    diag.add_argument("--lam", type=float, default=0.01)
    diag.add_argument("--out", default=None)
    diag.set_defaults(fn=cmd_diagnose)

    alacs = sub.add_parser("alacs", help="full pipeline")
    alacs_sub = alacs.add_subparsers(dest="subcommand", required=True)
    run = alacs_sub.add_parser("run", help="run the experiment grid from a config")
    run.add_argument("config")
    run.add_argument("--out-dir", default="reports")
    run.set_defaults(fn=cmd_alacs_run)

    sw = sub.add_parser("sweep", help="probe-setting sweep from a config")
    sw.add_argument("config")
    sw.add_argument("--out-dir", default="sweeps")
    sw.set_defaults(fn=cmd_sweep)

    f3 = sub.add_parser("fig3a", help="solution-space distance comparison")
    f3.add_argument("--topology", default="ERNET")
    f3.add_argument("--p", type=float, default=0.3)
    f3.add_argument("--trials", type=int, default=40)
    f3.add_argument("--seed", type=int, default=7)
    f3.add_argument("--json", action="store_true")
    f3.set_defaults(fn=cmd_fig3a)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except AcslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
