"""Deterministic per-link congestion scenarios and per-packet forwarding.

A scenario draws, per link: a congestion flag (independent Bernoulli), a
loss rate and a mean queueing delay, plus the regime-dependent propagation
delay and bandwidth. Packet forwarding is memoryless: each packet is lost
independently on each traversed link, and a delivered packet accumulates
propagation delay plus an exponential queueing delay per link. Everything
is reproducible from the scenario seed.

Congested links draw loss in [2%, 10%] and queueing means in [2, 8] ms;
uncongested links stay below 0.5% loss and 0.3 ms queueing. The bands keep
congested paths separable while leaving the classes overlapping enough to
be interesting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import acs
from .errors import ConfigError
from .seeding import as_rng
from .topology import Topology, load_topology

REGIMES = ("homogeneous", "heterogeneous")

CONGESTED_LOSS = (0.02, 0.10)
UNCONGESTED_LOSS = (0.0, 0.005)
CONGESTED_QUEUE_MS = (2.0, 8.0)
UNCONGESTED_QUEUE_MS = (0.0, 0.3)
HOMOGENEOUS_DELAY_MS = 20.0
HOMOGENEOUS_BW_MBPS = 20.0
HETEROGENEOUS_RANGE = (20.0, 25.0)


@dataclass(frozen=True)
class ScenarioConfig:
    topology: str = "ERNET"
    congestion_prob: object = 0.1  # scalar or per-link sequence
    regime: str = "homogeneous"
    rng_seed: int = 0
    duration_s: float = 300.0

    def validate(self, n_links: Optional[int] = None) -> np.ndarray:
        if self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.duration_s <= 0:
            raise ConfigError("scenario duration must be positive")
        p = np.atleast_1d(np.asarray(self.congestion_prob, dtype=np.float64))
        if np.any((p < 0.0) | (p > 1.0)):
            raise ConfigError(f"congestion probability outside [0, 1]: {self.congestion_prob}")
        if n_links is not None:
            if p.size == 1:
                p = np.full(n_links, p[0])
            elif p.size != n_links:
                raise ConfigError(f"per-link probability vector has {p.size} entries "
                                  f"for {n_links} links")
        return p


@dataclass
class GroundTruth:
    """One scenario realization: per-link state plus realized link parameters."""

    topology: Topology
    congested: np.ndarray
    loss_rate: np.ndarray
    queue_delay_mean_ms: np.ndarray
    link_delay_ms: np.ndarray
    link_bandwidth_mbps: np.ndarray
    duration_s: float
    regime: str = "homogeneous"
    seed: Optional[int] = None

    @property
    def n_links(self) -> int:
        return self.congested.shape[0]

    def path_bandwidth(self, path_id: int) -> float:
        """Bottleneck bandwidth along the path."""
        links = list(self.topology.paths[path_id].links)
        return float(self.link_bandwidth_mbps[links].min())


@dataclass(frozen=True)
class PacketEvent:
    path_id: int
    index: int
    send_time_ms: float
    receive_time_ms: Optional[float]  # None == lost

    @property
    def lost(self) -> bool:
        return self.receive_time_ms is None

    @property
    def delay_ms(self) -> Optional[float]:
        if self.receive_time_ms is None:
            return None
        return self.receive_time_ms - self.send_time_ms


def sample_ground_truth(cfg: ScenarioConfig, topology: Optional[Topology] = None) -> GroundTruth:
    """Draw one scenario. Identical (cfg, seed) gives bit-identical output.

    Draw order is fixed: link parameters (heterogeneous regime only), then
    congestion flags, then loss rates, then queueing means.
    """
    topo = topology if topology is not None else load_topology(cfg.topology)
    p = cfg.validate(n_links=topo.n_links)
    rng = as_rng(cfg.rng_seed)
    n = topo.n_links
    if cfg.regime == "heterogeneous":
        lo, hi = HETEROGENEOUS_RANGE
        delays = rng.uniform(lo, hi, size=n)
        bws = rng.uniform(lo, hi, size=n)
    else:
        delays = np.full(n, HOMOGENEOUS_DELAY_MS)
        bws = np.full(n, HOMOGENEOUS_BW_MBPS)
    congested = rng.random(n) < p
    u_loss = rng.random(n)
    loss = np.where(
        congested,
        CONGESTED_LOSS[0] + u_loss * (CONGESTED_LOSS[1] - CONGESTED_LOSS[0]),
        UNCONGESTED_LOSS[0] + u_loss * (UNCONGESTED_LOSS[1] - UNCONGESTED_LOSS[0]),
    )
    u_q = rng.random(n)
    queue = np.where(
        congested,
        CONGESTED_QUEUE_MS[0] + u_q * (CONGESTED_QUEUE_MS[1] - CONGESTED_QUEUE_MS[0]),
        UNCONGESTED_QUEUE_MS[0] + u_q * (UNCONGESTED_QUEUE_MS[1] - UNCONGESTED_QUEUE_MS[0]),
    )
    return GroundTruth(
        topology=topo,
        congested=congested,
        loss_rate=loss,
        queue_delay_mean_ms=queue,
        link_delay_ms=delays,
        link_bandwidth_mbps=bws,
        duration_s=float(cfg.duration_s),
        regime=cfg.regime,
        seed=int(cfg.rng_seed) if np.isscalar(cfg.rng_seed) else None,
    )


def transmit(gt: GroundTruth, path_id: int, send_times, rng) -> list:
    """Forward packets over one path.

    Each packet is dropped independently per traversed link; survivors get
    the propagation sum plus per-link exponential queueing delay. No FIFO
    coupling between packets. Loss draws happen before delay draws so the
    stream layout is stable.
    """
    topo = gt.topology
    if not 0 <= path_id < topo.n_paths:
        raise IndexError(f"unknown path {path_id} (|P|={topo.n_paths})")
    times = np.asarray(send_times, dtype=np.float64)
    if times.ndim != 1:
        raise ValueError("send_times must be one-dimensional")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("send_times must be strictly increasing")
    rng = as_rng(rng)
    links = list(topo.paths[path_id].links)
    k, h = times.size, len(links)
    lost = (rng.random((k, h)) < gt.loss_rate[links]).any(axis=1)
    queue = rng.exponential(scale=np.broadcast_to(gt.queue_delay_mean_ms[links], (k, h)))
    total = gt.link_delay_ms[links].sum() + queue.sum(axis=1)
    events = []
    for i in range(k):
        rx = None if lost[i] else float(times[i] + total[i])
        events.append(PacketEvent(path_id=path_id, index=i,
                                  send_time_ms=float(times[i]), receive_time_ms=rx))
    return events


def path_ground_truth_labels(gt: GroundTruth, topology: Optional[Topology] = None):
    """Exact per-path (A+, A, B) from the scenario's link states."""
    topo = topology if topology is not None else gt.topology
    x = gt.congested.astype(np.uint8)
    plus = acs.acs_plus(topo.routing, x)
    cat = acs.acs_cat(plus)
    b = (plus > 0).astype(np.uint8)
    return plus, cat, b
