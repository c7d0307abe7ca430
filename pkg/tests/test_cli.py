import json

import pytest

from acslab.cli import main
from acslab.probing import import_dataset


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_topo_show(capsys):
    code, out, _ = run(capsys, "topo", "show", "ERNET")
    assert code == 0
    assert "12 paths, 13 links" in out


def test_topo_show_json(capsys):
    code, out, _ = run(capsys, "topo", "show", "GEANT", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["paths"] == 15
    assert len(doc["routing"]) == 15


def test_topo_show_unknown(capsys):
    code, _, err = run(capsys, "topo", "show", "NOPE")
    assert code == 1
    assert "unknown topology" in err


def test_simulate_deterministic(tmp_path, capsys):
    f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
    for f in (f1, f2):
        code, _, _ = run(capsys, "simulate", "--topology", "ERNET", "--p", "0.4",
                         "--seed", "3", "--out", str(f))
        assert code == 0
    assert f1.read_bytes() == f2.read_bytes()
    doc = json.loads(f1.read_text())
    assert len(doc["congested"]) == 13
    assert len(doc["path_plus"]) == 12


def test_probe_export_and_stats_reuse(tmp_path, capsys):
    train = tmp_path / "train.jsonl"
    code, out, _ = run(capsys, "probe", "export", "--topology", "ERNET",
                       "--p", "0.3", "--scenarios", "2", "--seed", "1",
                       "--out", str(train))
    assert code == 0
    assert "wrote 24 records" in out
    header, records = import_dataset(train)
    assert header["with_labels"] is True
    assert len(header["path_hops"]) == 12
    assert sum(header["path_hops"]) == 39  # ERNET hop total
    assert len(records) == 24
    infer = tmp_path / "infer.jsonl"
    code, _, _ = run(capsys, "probe", "export", "--topology", "ERNET",
                     "--p", "0.3", "--scenarios", "1", "--seed", "9",
                     "--no-labels", "--stats-from", str(train), "--out", str(infer))
    assert code == 0
    h2, recs2 = import_dataset(infer)
    assert h2["feature_mean"] == header["feature_mean"]
    assert "label_cat" not in recs2[0]


def test_labels_oracle_vs_noisy(tmp_path, capsys):
    f = tmp_path / "labels.jsonl"
    code, _, _ = run(capsys, "labels", "--topology", "ERNET", "--p", "0.5",
                     "--seed", "2", "--scenarios", "2", "--out", str(f))
    assert code == 0
    recs = [json.loads(l) for l in f.read_text().splitlines()]
    assert len(recs) == 24
    assert all(r["pred_cat"] == min(r["pred_plus"], 2) for r in recs)
    g = tmp_path / "noisy.jsonl"
    code, _, _ = run(capsys, "labels", "--topology", "ERNET", "--p", "0.5",
                     "--seed", "2", "--scenarios", "2", "--source", "oracle_noisy",
                     "--error-rate", "1.0", "--out", str(g))
    assert code == 0
    noisy = [json.loads(l) for l in g.read_text().splitlines()]
    assert any(a["pred_cat"] != b["pred_cat"] for a, b in zip(recs, noisy))


def test_diagnose_with_oracle_labels(tmp_path, capsys):
    out = tmp_path / "diag.json"
    code, _, _ = run(capsys, "diagnose", "--topology", "ERNET", "--p", "0.4",
                     "--seed", "3", "--algorithm", "netscope", "--mode", "plus",
                     "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["algorithm"] == "netscope"
    assert len(doc["x_hat"]) == 13
    assert doc["z_hat"] is not None


def test_diagnose_from_measurement_file(tmp_path, capsys):
    meas = tmp_path / "meas.json"
    meas.write_text(json.dumps({"path_loss": [0.05] * 12}))
    code, out, _ = run(capsys, "diagnose", "--topology", "ERNET",
                       "--algorithm", "sumtomo", "--measurements", str(meas))
    assert code == 0
    doc = json.loads(out)
    assert doc["ranges"] is not None


ALACS_CONFIG = {
    "topology": "ERNET",
    "p_grid": [0.3, 0.6],
    "repetitions": 3,
    "master_seed": 11,
    "algorithms": ["clink", "netscope"],
    "modes": ["none", "plus"],
}


def test_alacs_run_deterministic(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(ALACS_CONFIG))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        code, _, _ = run(capsys, "alacs", "run", str(cfg), "--out-dir", str(out))
        assert code == 0
    for name in ("report.csv", "report.json", "summary.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    csv = (out1 / "report.csv").read_text().splitlines()
    assert len(csv) == 1 + 2 * 2 * 2  # header + p x algorithms x modes
    report = json.loads((out1 / "report.json").read_text())
    assert report["rows"][0]["n_reps"] == 3


def test_alacs_rejects_zero_repetitions(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({**ALACS_CONFIG, "repetitions": 0}))
    code, _, err = run(capsys, "alacs", "run", str(cfg), "--out-dir",
                       str(tmp_path / "r"))
    assert code == 1
    assert "repetitions" in err


def test_alacs_rejects_unknown_field(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({**ALACS_CONFIG, "bogus": 1}))
    code, _, err = run(capsys, "alacs", "run", str(cfg), "--out-dir",
                       str(tmp_path / "r"))
    assert code == 1
    assert "bogus" in err


SWEEP_CONFIG = {
    "topology": "ERNET",
    "p": 0.3,
    "scenarios": 2,
    "master_seed": 4,
    "rate_ratios": [0.01, 0.05],
    "duration_ratios": [0.2, 0.4, 0.8],
    "packets_per_action": 4,
}


def test_sweep_grid(tmp_path, capsys):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps(SWEEP_CONFIG))
    out = tmp_path / "sw"
    code, stdout, _ = run(capsys, "sweep", str(cfg), "--out-dir", str(out))
    assert code == 0
    datasets = sorted(out.glob("sweep_rr*.jsonl"))
    assert len(datasets) == 6  # 2 rate ratios x 3 duration ratios
    report = json.loads((out / "sweep.json").read_text())
    rows = report["rows"]
    # intrusiveness: heavier probing raises the observed path loss
    loss_01 = [r["mean_path_loss"] for r in rows if r["rate_ratio"] == 0.01]
    loss_05 = [r["mean_path_loss"] for r in rows if r["rate_ratio"] == 0.05]
    assert min(loss_05) > max(loss_01)


def test_sweep_empty_grid_rejected(tmp_path, capsys):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({**SWEEP_CONFIG, "rate_ratios": []}))
    code, _, err = run(capsys, "sweep", str(cfg), "--out-dir", str(tmp_path / "x"))
    assert code == 1
    assert "empty sweep grid" in err


def test_fig3a_json(capsys):
    code, out, _ = run(capsys, "fig3a", "--topology", "ERNET", "--p", "0.3",
                       "--trials", "10", "--seed", "2", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "acs_closer"
    assert doc["mean_distance_acs"] < doc["mean_distance_bcs_only"]
