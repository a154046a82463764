"""
Optical mesh routing and round-trip latency
===========================================

Builds the inter-satellite mesh for the Walker preset (four terminals per
satellite, 1500 km maximum link range) and compares bent-pipe, multi-hop
orbital breakout and gateway breakout round trips.
"""
from collections import Counter

from orbitel import geometry as geo
from orbitel import mesh
from orbitel.scenario import load_scenario

scenario = load_scenario("walker_600")
shell = scenario.shells[0]
snap = mesh.build_snapshot(geo.propagate_all(shell, 0.0), max_link_km=scenario.mesh.max_link_km,
                           link_capacity_gbps=scenario.mesh.link_capacity_gbps)
degrees = Counter(snap.degree(n) for n in snap.nodes)
print(f"{len(snap.edges)} optical links; terminals in use: {dict(sorted(degrees.items()))}")

# %%
# Latency-optimal routes from satellite 0, grouped by hop count.
print("\nhops  one_way_ms  rtt_ms (1100 km user leg)")
seen = set()
for n in snap.nodes:
    p = mesh.route(snap, mesh.sat_node(0), n)
    if p and p.hop_count not in seen and p.hop_count <= 8:
        seen.add(p.hop_count)
        print(f"{p.hop_count:4d}  {p.total_latency_ms:10.2f}  {mesh.end_to_end_rtt_ms(1100.0, p):6.2f}")

# %%
# Breakout options for a user 550 km below the serving satellite.
path = mesh.route(snap, mesh.sat_node(0), mesh.sat_node(4))
print(f"\nbent pipe, no mesh:          {mesh.end_to_end_rtt_ms(550.0):6.2f} ms")
print(f"orbital core {path.hop_count} hops away:   {mesh.end_to_end_rtt_ms(550.0, path):6.2f} ms")
print(f"terrestrial gateway (+26 ms): {mesh.end_to_end_rtt_ms(550.0, None, mesh.GATEWAY, 26.0):6.2f} ms")
