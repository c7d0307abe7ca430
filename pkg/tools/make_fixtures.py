#!/usr/bin/env python3
"""Regenerate the shipped topology fixtures.

Each fixture is a connected random backbone plus a set of shortest paths
between distinct endpoint pairs, searched until the aggregate targets match
the published characteristics of the real network (path count, link count,
mean hop count). Links not covered by any path are trimmed and ids
relabeled densely, so the stored topology is exactly the measured
sub-network. Quality gates: all links covered, no duplicated routing
columns (indistinguishable links) and no duplicated paths.

Usage: python tools/make_fixtures.py [outdir]
"""

from __future__ import annotations

import sys
from collections import deque
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from acslab import _kernels  # noqa: E402
from acslab.topology import Link, Path as NetPath, Topology, build_routing, serialize_topology  # noqa: E402

# name -> (paths, links, total_hops, n_nodes, extra_edges, seed, identifiability gate)
TARGETS = {
    "chinanet": (17, 21, 66, 18, 9, 11, False),
    "agis": (14, 18, 50, 17, 7, 3, False),
    "geant": (15, 17, 54, 15, 7, 1, True),
    "ernet": (12, 13, 39, 12, 5, 5, True),
}


def count_recovery_unique(topo, n_seeds=40, p=0.3, base_seed=99):
    """Noise-free identifiability gate.

    For sampled congested sets with per-link losses, the exact path losses
    must single out the true support among all supports with the same path
    counts (every alternative leaves a clearly nonzero residual). Keeps the
    count-constrained solvers' noise-free recovery exact on this fixture.
    """
    routing = topo.routing
    cols = routing.astype(np.float64)
    for seed in range(n_seeds):
        rng = np.random.default_rng(np.random.SeedSequence([base_seed, seed]))
        x = (rng.random(topo.n_links) < p).astype(np.uint8)
        z = np.where(x, rng.uniform(0.02, 0.10, topo.n_links), 0.0)
        b = cols @ (-np.log1p(-z))
        plus = routing.astype(np.int64) @ x
        pats = _kernels.scan_feasible(routing, _kernels.MODE_PLUS, plus)
        res, _ = _kernels.nnls_scan(cols, b, pats)
        truth_pat = _kernels.bits_to_pattern(x)
        k = int(np.argmin(res))
        if pats[k] != truth_pat:
            return False
        others = res[pats != truth_pat]
        if others.size and others.min() < 1e-10:
            return False
    return True


def random_connected_graph(rng, n_nodes, extra_edges):
    order = rng.permutation(n_nodes)
    edges = set()
    for i in range(1, n_nodes):
        a, b = order[rng.integers(0, i)], order[i]
        edges.add((min(a, b), max(a, b)))
    while len(edges) < n_nodes - 1 + extra_edges:
        a, b = rng.integers(0, n_nodes, size=2)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def bfs_path(adj, src, dst, rng):
    """Shortest path as an edge list; neighbor order shuffled per call."""
    prev = {src: None}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            break
        nbrs = list(adj[u])
        rng.shuffle(nbrs)
        for v, eid in nbrs:
            if v not in prev:
                prev[v] = (u, eid)
                q.append(v)
    if dst not in prev:
        return None
    out = []
    node = dst
    while prev[node] is not None:
        u, eid = prev[node]
        out.append(eid)
        node = u
    return out[::-1]


def pick_paths(rng, candidates, n_paths, total_hops):
    """Random subset of size n_paths whose hop counts sum to total_hops."""
    for _ in range(4000):
        idx = rng.permutation(len(candidates))
        chosen = []
        s = 0
        for k in idx:
            h = len(candidates[k][1])
            if len(chosen) < n_paths and s + h <= total_hops:
                chosen.append(k)
                s += h
        if len(chosen) == n_paths and s == total_hops:
            return [candidates[k] for k in chosen]
    return None


def build_fixture(name, n_paths, n_links, total_hops, n_nodes, extra_edges, seed,
                  gate_identifiability=False):
    rng = np.random.default_rng(seed)
    for attempt in range(20000):
        edges = random_connected_graph(rng, n_nodes, extra_edges)
        adj = {n: [] for n in range(n_nodes)}
        for eid, (a, b) in enumerate(edges):
            adj[a].append((b, eid))
            adj[b].append((a, eid))
        pairs = [(s, t) for s in range(n_nodes) for t in range(s + 1, n_nodes)]
        cands = []
        seen_linksets = set()
        for s, t in pairs:
            p = bfs_path(adj, s, t, rng)
            if p is None or not 2 <= len(p) <= 6:
                continue
            key = frozenset(p)
            if key in seen_linksets:
                continue
            seen_linksets.add(key)
            cands.append(((s, t), p))
        if len(cands) < n_paths:
            continue
        picked = pick_paths(rng, cands, n_paths, total_hops)
        if picked is None:
            continue
        covered = sorted({eid for _, p in picked for eid in p})
        if len(covered) != n_links:
            continue
        relabel = {old: new for new, old in enumerate(covered)}
        paths = [tuple(relabel[e] for e in p) for _, p in picked]
        routing = np.zeros((n_paths, n_links), dtype=np.uint8)
        for j, p in enumerate(paths):
            routing[j, list(p)] = 1
        cols = {tuple(routing[:, i]) for i in range(n_links)}
        if len(cols) != n_links:
            continue
        kept_edges = [edges[old] for old in covered]
        used_nodes = sorted({n for a, b in kept_edges for n in (a, b)})
        node_map = {old: new for new, old in enumerate(used_nodes)}
        links = [
            Link(i, node_map[a], node_map[b], 20.0, 20.0)
            for i, (a, b) in enumerate(kept_edges)
        ]
        net_paths = [NetPath(j, p) for j, p in enumerate(paths)]
        topo = Topology(
            name=name.upper(),
            nodes=tuple(range(len(used_nodes))),
            links=tuple(links),
            paths=tuple(net_paths),
            routing=build_routing(n_links, net_paths),
        )
        if gate_identifiability and not count_recovery_unique(topo):
            continue
        print(f"{name}: attempt {attempt}, paths={topo.n_paths} links={topo.n_links} "
              f"mean_hops={topo.mean_hops():.4f}")
        return topo
    raise RuntimeError(f"no fixture found for {name}")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else REPO / "src/acslab/fixtures/topologies"
    outdir.mkdir(parents=True, exist_ok=True)
    for name, spec in TARGETS.items():
        topo = build_fixture(name, *spec)
        text = serialize_topology(topo)
        header = (
            f"# {name.upper()} fixture: path set chosen by tools/make_fixtures.py\n"
            f"# (aggregate-matched to the published network characteristics;\n"
            f"#  the concrete endpoint pairs and paths are this repo's own choice)\n"
        )
        (outdir / f"{name}.topo").write_text(header + text, encoding="utf-8")
        print(f"  wrote {outdir / f'{name}.topo'}")


if __name__ == "__main__":
    main()
