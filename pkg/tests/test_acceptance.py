"""Acceptance gate: one test per primary criterion, each printing a
PASS line with its measured runtime (run with -s or -rA to see them).

Criteria are property-based and directional at desk scale (ERNET/GEANT,
oracle or synthetic label sources); nothing here needs a trained model.
"""

import json
import math
import time

import numpy as np
import pytest

from acslab import acs, metrics
from acslab.classify import LabelSource
from acslab.cli import main as cli_main
from acslab.experiment import ExperimentConfig, fig3a_gap, run_alacs
from acslab.probing import ProbeConfig, action_offsets_ms, action_span_ms, solve_alpha
from acslab.seeding import derive_rng
from conftest import random_routing

# Pre-registered seed. The clink margin at p=0.9 is structurally ~0.056 with
# sampling std ~0.006 over 40 reps (the unconstrained MAP already selects every
# link there), so the suite pins a seed rather than re-rolling per run.
FIG8_MASTER_SEED = 5
NOISE_MASTER_SEED = 5
NOISE_LABEL_SEED = 105


def _report(tag, t0, detail=""):
    dt = time.monotonic() - t0
    print(f"\nACCEPTANCE {tag}: PASS ({dt:.1f}s){' - ' + detail if detail else ''}")


# ---------------------------------------------------------------------------
# 1. Algebra oracle equivalence + subset chain (< 1 min)
# ---------------------------------------------------------------------------


def test_algebra_oracle_equivalence():
    t0 = time.monotonic()
    rng = derive_rng(2024)

    def fold_bool(path_links, x):
        return [int(any(x[i] for i in links)) for links in path_links]

    def fold_sum(path_links, x):
        return [sum(int(x[i]) for i in links) for links in path_links]

    for _ in range(10_000):
        n_paths = int(rng.integers(3, 9))
        n_links = int(rng.integers(2, 14))
        r = random_routing(rng, n_paths, n_links)
        x = (rng.random(n_links) < rng.uniform(0.1, 0.9)).astype(int)
        path_links = [list(np.nonzero(row)[0]) for row in r]
        assert acs.boolean_status(r, x).tolist() == fold_bool(path_links, x)
        plus = acs.acs_plus(r, x)
        assert plus.tolist() == fold_sum(path_links, x)
        assert acs.acs_cat(plus).tolist() == [min(v, 2) for v in plus]

    chain_checked = 0
    for _ in range(60):
        n_paths = int(rng.integers(3, 9))
        n_links = int(rng.integers(4, 14))
        r = random_routing(rng, n_paths, n_links)
        truth = (rng.random(n_links) < rng.uniform(0.1, 0.7)).astype(np.uint8)
        plus = acs.acs_plus(r, truth)
        cat = acs.acs_cat(plus)
        b = (plus > 0).astype(int)
        s_plus = set(acs.feasible_patterns(r, plus, "plus").tolist())
        s_cat = set(acs.feasible_patterns(r, cat, "cat").tolist())
        s_bcs = set(acs.feasible_patterns(r, b, "bcs").tolist())
        assert s_plus <= s_cat <= s_bcs
        from acslab._kernels import bits_to_pattern

        assert bits_to_pattern(truth) in s_plus
        chain_checked += 1
    assert chain_checked == 60
    assert time.monotonic() - t0 < 60
    _report("algebra-oracle-equivalence", t0, "10000 folds + 60 exhaustive chains")


# ---------------------------------------------------------------------------
# 2. Agreement dominance implies metric monotonicity (Proposition-style)
# ---------------------------------------------------------------------------


def test_dominance_metric_monotonicity():
    t0 = time.monotonic()
    rng = derive_rng(2025)
    betas = (0.5, 1.0, 2.0)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 24))
        while True:
            a = (rng.random(n) < 0.5).astype(np.uint8)
            b = (rng.random(n) < 0.5).astype(np.uint8)
            disagree = np.nonzero(a != b)[0]
            if disagree.size:
                break
        k = int(rng.integers(1, disagree.size + 1))
        fix = rng.choice(disagree, size=k, replace=False)
        bp = b.copy()
        bp[fix] = a[fix]
        assert acs.agreement_dominates(a, b, bp)
        if not acs.metric_monotonicity_check(a, b, bp, betas=betas):
            violations += 1
    assert violations == 0
    _report("dominance-monotonicity", t0, "10000 triples, beta in {0.5,1,2}, 0 violations")


# ---------------------------------------------------------------------------
# 3. Solution-space distance gap (< 10 min)
# ---------------------------------------------------------------------------


def test_distance_gap_direction():
    t0 = time.monotonic()
    cells = []
    for name in ("ERNET", "GEANT"):
        for p in (0.2, 0.4):
            doc = fig3a_gap(name, p, trials=40, seed=7)
            cells.append((name, p, doc["mean_distance_acs"],
                          doc["mean_distance_bcs_only"]))
            assert not math.isnan(doc["mean_distance_bcs_only"])
            assert doc["mean_distance_acs"] < doc["mean_distance_bcs_only"], cells[-1]
    assert time.monotonic() - t0 < 600
    detail = "; ".join(f"{n} p={p}: {a:.3f}<{b:.3f}" for n, p, a, b in cells)
    _report("distance-gap-direction", t0, detail)


# ---------------------------------------------------------------------------
# 4. Constrained diagnosis beats the Boolean baseline (< 30 min)
# ---------------------------------------------------------------------------


def test_constrained_diagnosis_improvement():
    t0 = time.monotonic()
    cfg = ExperimentConfig(topology="ERNET", repetitions=40,
                           master_seed=FIG8_MASTER_SEED)
    report = run_alacs(cfg)
    rows = {(r["p"], r["algorithm"], r["mode"]): r for r in report["rows"]}
    worst_margin = math.inf
    for p in cfg.p_grid:
        for a in cfg.algorithms:
            f = {m: rows[(p, a, m)]["f1_mean"] for m in ("none", "cat", "plus")}
            assert f["plus"] >= f["cat"] >= f["none"], (p, a, f)
            if p >= 0.5:
                margin = f["plus"] - f["none"]
                worst_margin = min(worst_margin, margin)
                assert margin >= 0.05, (p, a, f)
            if a in ("netscope", "sumtomo"):
                n_none = rows[(p, a, "none")]["nrmse_mean"]
                n_plus = rows[(p, a, "plus")]["nrmse_mean"]
                assert math.isnan(n_none) or n_plus <= n_none, (p, a, n_none, n_plus)
    assert time.monotonic() - t0 < 1800
    _report("constrained-diagnosis-improvement", t0,
            f"worst ACS+ margin at p>=0.5: {worst_margin:.3f}")


# ---------------------------------------------------------------------------
# 5. Label-noise sensitivity
# ---------------------------------------------------------------------------


def test_label_noise_sensitivity():
    t0 = time.monotonic()
    eps_grid = (0.0, 0.1, 0.2, 0.4)
    improvements = {a: [] for a in ("clink", "netscope", "sumtomo")}
    for eps in eps_grid:
        cfg = ExperimentConfig(
            topology="ERNET", repetitions=40, master_seed=NOISE_MASTER_SEED,
            p_grid=(0.5,), modes=("none", "plus"),
            labels=LabelSource("oracle_noisy", error_rate=eps, seed=NOISE_LABEL_SEED))
        report = run_alacs(cfg)
        rows = {(r["algorithm"], r["mode"]): r["f1_mean"] for r in report["rows"]}
        for a in improvements:
            improvements[a].append(rows[(a, "plus")] - rows[(a, "none")])
    for a, vals in improvements.items():
        for k in range(len(vals) - 1):
            assert vals[k + 1] <= vals[k] + 0.02, (a, eps_grid[k + 1], vals)
    detail = "; ".join(f"{a}: " + "->".join(f"{v:.2f}" for v in vals)
                       for a, vals in improvements.items())
    _report("label-noise-sensitivity", t0, detail)


# ---------------------------------------------------------------------------
# 6. Probe non-intrusiveness and alpha precision
# ---------------------------------------------------------------------------


def test_probe_rate_cap_and_alpha_residual():
    t0 = time.monotonic()
    from acslab.errors import ConfigError

    checked = 0
    for m in (2, 3, 5, 10, 20):
        for rr in (0.002, 0.005, 0.01, 0.02):
            for bw in (20.0, 22.5, 25.0):
                cfg = ProbeConfig(packets_per_action=m, rate_ratio=rr)
                try:
                    alpha = solve_alpha(cfg, bw)
                except ConfigError:
                    continue
                t_s_target = action_span_ms(cfg, bw)
                t_s = action_offsets_ms(cfg, alpha)[-1]
                residual = abs(t_s - t_s_target) / t_s_target
                assert residual <= 1e-9, (m, rr, bw, residual)
                bits = m * cfg.packet_size_bytes * 8
                achieved_bps = bits / (t_s / 1000.0)
                assert achieved_bps <= 1.001 * rr * bw * 1e6, (m, rr, bw)
                checked += 1
    assert checked >= 50
    _report("probe-non-intrusiveness", t0, f"{checked} schedules within cap")


# ---------------------------------------------------------------------------
# 7. CLI determinism
# ---------------------------------------------------------------------------


def test_cli_determinism(tmp_path, capsys):
    t0 = time.monotonic()
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({
        "topology": "ERNET", "p_grid": [0.2, 0.7], "repetitions": 4,
        "master_seed": 13,
    }))
    outs = []
    for d in ("run1", "run2"):
        out = tmp_path / d
        assert cli_main(["alacs", "run", str(cfg), "--out-dir", str(out)]) == 0
        outs.append(out)
    for name in ("report.csv", "report.json", "summary.txt"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name

    d1, d2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for d in (d1, d2):
        assert cli_main(["probe", "export", "--topology", "ERNET", "--p", "0.3",
                         "--scenarios", "2", "--seed", "21", "--out", str(d)]) == 0
    assert d1.read_bytes() == d2.read_bytes()

    capsys.readouterr()  # flush whatever the runs above printed
    figs = []
    for _ in range(2):
        assert cli_main(["fig3a", "--topology", "ERNET", "--p", "0.2",
                         "--trials", "10", "--seed", "3", "--json"]) == 0
        figs.append(capsys.readouterr().out)
    assert figs[0] == figs[1]
    _report("cli-determinism", t0, "alacs run, probe export, fig3a byte-identical")
