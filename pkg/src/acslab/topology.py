"""Network topologies: undirected graphs with fixed end-to-end paths.

A topology is immutable after load. The routing matrix is the (|P|, |L|)
Boolean incidence of paths over links and is rebuilt (and validated) from
the path link-lists on load.

Text format, line oriented and diff friendly::

    # comment
    node 0
    link 0 0 1 20.0 20.0        # link <id> <node_a> <node_b> <delay_ms> <bw_mbps>
    path 0 0 3 7                # path <id> <link_id> <link_id> ...

Fixtures for four real-world-sized networks (CHINANET, AGIS, GEANT, ERNET)
ship under ``fixtures/topologies/``. Only aggregate characteristics of the
originals are matched (path/link counts, mean hop count); the concrete path
sets are this repo's own choice and are documented in the fixture headers.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from .errors import TopologyParseError, TopologyValidationError

FIXTURES = {
    "CHINANET": "chinanet.topo",
    "AGIS": "agis.topo",
    "GEANT": "geant.topo",
    "ERNET": "ernet.topo",
}


@dataclass(frozen=True)
class Link:
    id: int
    node_a: int
    node_b: int
    propagation_delay_ms: float
    bandwidth_mbps: float

    def endpoints(self):
        return (self.node_a, self.node_b)


@dataclass(frozen=True)
class Path:
    id: int
    links: tuple


@dataclass(frozen=True, eq=False)
class Topology:
    name: str
    nodes: tuple
    links: tuple
    paths: tuple
    routing: np.ndarray = field(repr=False)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def routing_row(self, path_id: int) -> np.ndarray:
        """Boolean incidence vector of one path over all links."""
        if not 0 <= path_id < self.n_paths:
            raise IndexError(f"path id {path_id} out of range (|P|={self.n_paths})")
        return self.routing[path_id].copy()

    def hop_counts(self) -> np.ndarray:
        return np.array([len(p.links) for p in self.paths], dtype=np.int64)

    def mean_hops(self) -> float:
        return float(self.hop_counts().mean())

    def link_delays(self) -> np.ndarray:
        return np.array([l.propagation_delay_ms for l in self.links], dtype=np.float64)

    def link_bandwidths(self) -> np.ndarray:
        return np.array([l.bandwidth_mbps for l in self.links], dtype=np.float64)


def routing_row(t: Topology, path_id: int) -> np.ndarray:
    return t.routing_row(path_id)


def build_routing(n_links: int, paths) -> np.ndarray:
    routing = np.zeros((len(paths), n_links), dtype=np.uint8)
    for p in paths:
        for lid in p.links:
            routing[p.id, lid] = 1
    return routing


def _validate(name, nodes, links, paths):
    node_set = set(nodes)
    if sorted(nodes) != list(range(len(nodes))):
        raise TopologyValidationError(f"{name}: node ids must be dense 0-based")
    if [l.id for l in links] != list(range(len(links))):
        raise TopologyValidationError(f"{name}: link ids must be dense 0-based")
    if [p.id for p in paths] != list(range(len(paths))):
        raise TopologyValidationError(f"{name}: path ids must be dense 0-based")
    for l in links:
        if l.node_a not in node_set or l.node_b not in node_set:
            raise TopologyValidationError(f"{name}: link {l.id} references unknown node")
        if l.node_a == l.node_b:
            raise TopologyValidationError(f"{name}: link {l.id} is a self loop")
        if l.propagation_delay_ms < 0 or l.bandwidth_mbps <= 0:
            raise TopologyValidationError(f"{name}: link {l.id} has invalid delay/bandwidth")
    for p in paths:
        if len(p.links) == 0:
            raise TopologyValidationError(f"path {p.id} traverses no link")
        for lid in p.links:
            if not 0 <= lid < len(links):
                raise TopologyValidationError(f"path {p.id} references unknown link {lid}")
        _walk_path(links, p)


def _walk_path(links, p: Path):
    """Check consecutive links chain through shared endpoints."""
    if len(p.links) == 1:
        return
    first, second = links[p.links[0]], links[p.links[1]]
    shared = set(first.endpoints()) & set(second.endpoints())
    if not shared:
        raise TopologyValidationError(
            f"path {p.id} is disconnected between links {first.id} and {second.id}"
        )
    cur = shared.pop()
    for lid in p.links[1:]:
        link = links[lid]
        if cur == link.node_a:
            cur = link.node_b
        elif cur == link.node_b:
            cur = link.node_a
        else:
            raise TopologyValidationError(
                f"path {p.id} is disconnected at link {link.id}"
            )


def parse_topology(text: str, name: str = "topology") -> Topology:
    nodes = []
    links = []
    paths = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "node":
                if len(parts) != 2:
                    raise ValueError("expected: node <id>")
                nodes.append(int(parts[1]))
            elif kind == "link":
                if len(parts) != 6:
                    raise ValueError("expected: link <id> <a> <b> <delay_ms> <bw_mbps>")
                links.append(
                    Link(int(parts[1]), int(parts[2]), int(parts[3]),
                         float(parts[4]), float(parts[5]))
                )
            elif kind == "path":
                if len(parts) < 3:
                    raise ValueError("expected: path <id> <link> [<link> ...]")
                paths.append(Path(int(parts[1]), tuple(int(x) for x in parts[2:])))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except ValueError as exc:
            raise TopologyParseError(str(exc), line_no=line_no) from None
    _validate(name, nodes, links, paths)
    routing = build_routing(len(links), paths)
    if routing.shape[0] and not routing.any(axis=1).all():
        raise TopologyValidationError(f"{name}: routing matrix has an all-zero row")
    return Topology(name=name, nodes=tuple(nodes), links=tuple(links),
                    paths=tuple(paths), routing=routing)


def serialize_topology(t: Topology) -> str:
    out = [f"# topology {t.name}: {t.n_paths} paths, {t.n_links} links"]
    for n in t.nodes:
        out.append(f"node {n}")
    for l in t.links:
        out.append(f"link {l.id} {l.node_a} {l.node_b} {l.propagation_delay_ms!r} {l.bandwidth_mbps!r}")
    for p in t.paths:
        out.append(f"path {p.id} " + " ".join(str(x) for x in p.links))
    return "\n".join(out) + "\n"


def fixture_names():
    return sorted(FIXTURES)


def load_topology(source: str) -> Topology:
    """Load a shipped fixture by name or a topology file by path."""
    key = str(source).upper()
    if key in FIXTURES:
        res = importlib.resources.files("acslab").joinpath(
            "fixtures", "topologies", FIXTURES[key]
        )
        return parse_topology(res.read_text(encoding="utf-8"), name=key)
    fs = FsPath(source)
    if fs.exists():
        return parse_topology(fs.read_text(encoding="utf-8"), name=fs.stem)
    raise TopologyValidationError(
        f"unknown topology {source!r}: not a fixture ({', '.join(fixture_names())}) "
        "and not an existing file"
    )
