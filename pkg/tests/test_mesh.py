import itertools
import math

import numpy as np
import pytest

from orbitel import geometry as geo
from orbitel import mesh
from orbitel.constants import SPEED_OF_LIGHT_KM_S


def _random_snapshot(rng, n):
    nodes = tuple(mesh.sat_node(i) for i in range(n))
    edges = []
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < 0.45:
            # integer distances make equal-cost ties common
            edges.append(mesh.Edge(nodes[a], nodes[b], float(rng.integers(1, 6)) * 1000.0, 10.0))
    return mesh.MeshSnapshot(0.0, nodes, tuple(edges))


@pytest.mark.parametrize("metric", [mesh.LATENCY, mesh.HOPS])
def test_route_matches_exhaustive_search(metric):
    rng = np.random.default_rng(77)
    agree = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        snap = _random_snapshot(rng, n)
        src, dst = (mesh.sat_node(int(k)) for k in rng.choice(n, 2, replace=False))
        got = mesh.route(snap, src, dst, metric)
        best = mesh.brute_force_route(snap, src, dst, metric)
        if best is None:
            agree += got is None
        else:
            agree += got is not None and math.isclose(mesh.path_cost(snap, got.nodes, metric), best[0],
                                                      rel_tol=0, abs_tol=1e-9)
    assert agree == 200


def test_equal_cost_tie_breaks_lexicographically():
    n = [mesh.sat_node(i) for i in range(4)]
    edges = (mesh.Edge(n[0], n[2], 1000.0, 10), mesh.Edge(n[2], n[3], 1000.0, 10),
             mesh.Edge(n[0], n[1], 1000.0, 10), mesh.Edge(n[1], n[3], 1000.0, 10))
    snap = mesh.MeshSnapshot(0.0, tuple(n), edges)
    assert mesh.route(snap, n[0], n[3]).nodes == (n[0], n[1], n[3])


def test_unreachable_and_unknown_nodes():
    n = [mesh.sat_node(i) for i in range(3)]
    snap = mesh.MeshSnapshot(0.0, tuple(n), (mesh.Edge(n[0], n[1], 100.0, 10),))
    assert mesh.route(snap, n[0], n[2]) is None
    with pytest.raises(KeyError):
        mesh.route(snap, n[0], "sat9999")
    with pytest.raises(ValueError):
        mesh.route(snap, n[0], n[1], metric="cost")
    self_path = mesh.route(snap, n[0], n[0])
    assert self_path.hop_count == 0 and self_path.total_latency_ms == 0.0


def test_path_latency_accounting():
    n = [mesh.sat_node(i) for i in range(3)]
    snap = mesh.MeshSnapshot(0.0, tuple(n), (mesh.Edge(n[0], n[1], 1000.0, 10), mesh.Edge(n[1], n[2], 2000.0, 10)))
    p = mesh.route(snap, n[0], n[2], switch_latency_ms=0.5)
    assert p.hop_count == 2 and p.total_distance_km == pytest.approx(3000.0)
    assert p.total_latency_ms == pytest.approx(3000.0 / SPEED_OF_LIGHT_KM_S * 1e3 + 1.0)


SHELL = geo.ConstellationShell(550.0, 53.0, 12, 50, 0.6)


@pytest.fixture(scope="module")
def walker_snapshot():
    return mesh.build_snapshot(geo.propagate_all(SHELL, 0.0), max_link_km=1500.0, link_capacity_gbps=30.0)


def test_terminal_budget_and_link_range(walker_snapshot):
    deg = {}
    for e in walker_snapshot.edges:
        deg[e.a] = deg.get(e.a, 0) + 1
        deg[e.b] = deg.get(e.b, 0) + 1
        assert e.distance_km <= 1500.0
        assert e.capacity_gbps == 30.0
    assert max(deg.values()) <= 4


def test_in_plane_neighbours_are_linked(walker_snapshot):
    adj = walker_snapshot.adjacency()
    for p in range(SHELL.n_planes):
        for s in range(SHELL.sats_per_plane):
            a = mesh.sat_node(p * 50 + s)
            b = mesh.sat_node(p * 50 + (s + 1) % 50)
            assert b in adj[a]


def test_walker_mesh_is_connected(walker_snapshot):
    adj = walker_snapshot.adjacency()
    seen, stack = {walker_snapshot.nodes[0]}, [walker_snapshot.nodes[0]]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    assert len(seen) == SHELL.n_sats


def test_snapshot_is_deterministic():
    states = geo.propagate_all(SHELL, 300.0)
    a = mesh.build_snapshot(states, max_link_km=1500.0)
    b = mesh.build_snapshot(list(reversed(states)), max_link_km=1500.0)
    assert a == b


def test_gateway_edges_respect_mask():
    gw = geo.GroundSite("gw", -23.6, -46.7)
    states = geo.propagate_all(SHELL, 0.0)
    snap = mesh.build_snapshot(states, [gw], max_link_km=1500.0)
    gw_edges = [e for e in snap.edges if e.b == mesh.gateway_node("gw")]
    visible = [s for s in states if geo.elevation_deg(s, gw) >= 25.0]
    assert len(gw_edges) == len(visible) > 0


def test_terminal_count_validation():
    with pytest.raises(ValueError):
        mesh.build_snapshot(geo.propagate_all(SHELL, 0.0)[:3], terminals_per_sat=0)


def test_single_hop_and_bent_pipe_latency():
    one_way = 550.0 / SPEED_OF_LIGHT_KM_S * 1e3
    assert one_way == pytest.approx(1.83, abs=0.01)
    assert mesh.end_to_end_rtt_ms(550.0) == pytest.approx(2 * one_way)
    assert mesh.end_to_end_rtt_ms(550.0) < 4.0
    assert mesh.end_to_end_rtt_ms(550.0, None, mesh.GATEWAY, 26.0) == pytest.approx(2 * one_way + 26.0)
    with pytest.raises(ValueError):
        mesh.end_to_end_rtt_ms(0.0)
    with pytest.raises(ValueError):
        mesh.end_to_end_rtt_ms(550.0, breakout="cloud")


def test_walker_multi_hop_rtt_bound(walker_snapshot):
    # every latency-optimal route of 3 to 5 hops from a satellite, with the
    # longest possible user leg at the 25 degree mask
    leg = 1100.0
    worst = 0.0
    for src in walker_snapshot.nodes[::25]:
        for dst in walker_snapshot.nodes[::7]:
            p = mesh.route(walker_snapshot, src, dst)
            if p is not None and 3 <= p.hop_count <= 5:
                worst = max(worst, mesh.end_to_end_rtt_ms(leg, p))
    assert 0.0 < worst < 50.0
