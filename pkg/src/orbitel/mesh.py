"""
Optical inter-satellite mesh: snapshot construction, routing and latency.

Node identifiers are strings: ``sat0042`` for satellites (zero padded so that
lexicographic order matches numeric order) and ``gw:<site_id>`` for gateways.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import DEFAULT_ELEVATION_MASK_DEG, SPEED_OF_LIGHT_KM_S
from .geometry import GroundSite, SatelliteState, elevation_deg, slant_range_km

DEFAULT_TERMINALS = 4
DEFAULT_LINK_GBPS = 10.0
HIGH_RATE_LINK_GBPS = 30.0
DEFAULT_SWITCH_LATENCY_MS = 0.5
DEFAULT_GATEWAY_LINK_GBPS = 20.0

LATENCY = "latency"
HOPS = "hops"
ORBITAL = "orbital"
GATEWAY = "gateway"


def sat_node(sat_id: int) -> str:
    return f"sat{sat_id:04d}"


def gateway_node(site_id: str) -> str:
    return f"gw:{site_id}"


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    distance_km: float
    capacity_gbps: float


@dataclass(frozen=True)
class MeshSnapshot:
    time_s: float
    nodes: tuple
    edges: tuple

    def adjacency(self) -> dict:
        adj = {n: {} for n in self.nodes}
        for e in self.edges:
            adj[e.a][e.b] = e
            adj[e.b][e.a] = e
        return adj

    def degree(self, node) -> int:
        return sum(1 for e in self.edges if node in (e.a, e.b))


@dataclass(frozen=True)
class RoutePath:
    nodes: tuple
    total_distance_km: float
    hop_count: int
    total_latency_ms: float


def build_snapshot(
    states: Sequence[SatelliteState],
    gateways: Sequence[GroundSite] = (),
    terminals_per_sat: int = DEFAULT_TERMINALS,
    max_link_km: float = 5000.0,
    link_capacity_gbps: float = DEFAULT_LINK_GBPS,
    gateway_mask_deg: float = DEFAULT_ELEVATION_MASK_DEG,
    gateway_capacity_gbps: float = DEFAULT_GATEWAY_LINK_GBPS,
) -> MeshSnapshot:
    """Assign optical terminals greedily.

    Candidate pairs are ranked in-plane neighbours first, then by distance
    (ties by node id); a pair is linked when both ends still have a free
    terminal and the separation is within ``max_link_km``.
    """
    if terminals_per_sat < 1:
        raise ValueError("terminals_per_sat must be >= 1")
    states = sorted(states, key=lambda s: s.sat_id)
    names = [sat_node(s.sat_id) for s in states]
    time_s = states[0].time_s if states else 0.0
    pos = np.array([s.position for s in states]).reshape(-1, 3)
    n = len(states)

    plane = np.array([s.plane for s in states], dtype=int)
    slot = np.array([s.slot for s in states], dtype=int)
    plane_size = np.zeros(plane.max() + 1 if n else 0, dtype=int)
    np.maximum.at(plane_size, plane, slot + 1)

    edges = []
    if n > 1:
        # node order equals id order, so (i, j) ties sort like node names
        i, j = np.triu_indices(n, k=1)
        d = np.linalg.norm(pos[i] - pos[j], axis=-1)
        keep = d <= max_link_km
        i, j, d = i[keep], j[keep], d[keep]
        m = plane_size[plane[i]]
        step = (slot[i] - slot[j]) % np.maximum(m, 1)
        neighbour = (plane[i] == plane[j]) & ((step == 1) | (step == m - 1))
        order = np.lexsort((j, i, d, ~neighbour))
        free = [terminals_per_sat] * n
        for a, b, dd in zip(i[order].tolist(), j[order].tolist(), d[order].tolist()):
            if free[a] and free[b]:
                free[a] -= 1
                free[b] -= 1
                edges.append(Edge(names[a], names[b], dd, link_capacity_gbps))

    nodes = list(names)
    for gw in gateways:
        g = gateway_node(gw.site_id)
        nodes.append(g)
        for s, name in zip(states, names):
            if elevation_deg(s, gw) >= gateway_mask_deg:
                edges.append(Edge(name, g, slant_range_km(s, gw), gateway_capacity_gbps))
    return MeshSnapshot(time_s, tuple(nodes), tuple(edges))


def _edge_cost(e: Edge, metric: str, switch_latency_ms: float) -> float:
    if metric == HOPS:
        return 1.0
    return e.distance_km / SPEED_OF_LIGHT_KM_S * 1e3 + switch_latency_ms


def _make_path(snapshot_adj, nodes, switch_latency_ms) -> RoutePath:
    dist = math.fsum(snapshot_adj[a][b].distance_km for a, b in zip(nodes, nodes[1:]))
    hops = len(nodes) - 1
    return RoutePath(tuple(nodes), dist, hops, dist / SPEED_OF_LIGHT_KM_S * 1e3 + hops * switch_latency_ms)


def route(
    snapshot: MeshSnapshot,
    src,
    dst,
    metric: str = LATENCY,
    switch_latency_ms: float = DEFAULT_SWITCH_LATENCY_MS,
) -> Optional[RoutePath]:
    """Shortest path by ``latency`` (propagation plus per-hop switching) or ``hops``.

    Among equal-cost paths the lexicographically smallest node sequence wins;
    ``None`` when ``dst`` is unreachable.
    """
    if metric not in (LATENCY, HOPS):
        raise ValueError(f"unknown metric {metric!r}")
    adj = snapshot.adjacency()
    for node in (src, dst):
        if node not in adj:
            raise KeyError(f"node {node!r} not in snapshot")
    heap = [(0.0, (src,))]
    done = set()
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return _make_path(adj, path, switch_latency_ms)
        for v, e in adj[u].items():
            if v not in done:
                heapq.heappush(heap, (cost + _edge_cost(e, metric, switch_latency_ms), path + (v,)))
    return None


def path_cost(snapshot: MeshSnapshot, nodes, metric: str = LATENCY,
              switch_latency_ms: float = DEFAULT_SWITCH_LATENCY_MS) -> float:
    adj = snapshot.adjacency()
    return math.fsum(_edge_cost(adj[a][b], metric, switch_latency_ms) for a, b in zip(nodes, nodes[1:]))


def brute_force_route(snapshot: MeshSnapshot, src, dst, metric: str = LATENCY,
                      switch_latency_ms: float = DEFAULT_SWITCH_LATENCY_MS):
    """Exhaustive search over simple paths; only for small graphs."""
    adj = snapshot.adjacency()
    if src == dst:
        return 0.0, (src,)
    others = [n for n in snapshot.nodes if n not in (src, dst)]
    best = None
    for k in range(len(others) + 1):
        for mid in itertools.permutations(others, k):
            nodes = (src, *mid, dst)
            if all(b in adj[a] for a, b in zip(nodes, nodes[1:])):
                c = path_cost(snapshot, nodes, metric, switch_latency_ms)
                if best is None or c < best[0]:
                    best = (c, nodes)
    return best


def path_latency_ms(path: Optional[RoutePath], switch_latency_ms: float = DEFAULT_SWITCH_LATENCY_MS) -> float:
    if path is None or path.hop_count == 0:
        return 0.0
    return path.total_distance_km / SPEED_OF_LIGHT_KM_S * 1e3 + path.hop_count * switch_latency_ms


def end_to_end_rtt_ms(
    user_leg_km: float,
    path: Optional[RoutePath] = None,
    breakout: str = ORBITAL,
    gateway_penalty_ms: float = 0.0,
    switch_latency_ms: float = DEFAULT_SWITCH_LATENCY_MS,
) -> float:
    """Round trip: user leg plus mesh path, both ways, plus any gateway penalty."""
    if not user_leg_km > 0:
        raise ValueError("user_leg_km must be positive")
    if breakout not in (ORBITAL, GATEWAY):
        raise ValueError(f"unknown breakout {breakout!r}")
    one_way = user_leg_km / SPEED_OF_LIGHT_KM_S * 1e3 + path_latency_ms(path, switch_latency_ms)
    return 2.0 * one_way + (gateway_penalty_ms if breakout == GATEWAY else 0.0)
