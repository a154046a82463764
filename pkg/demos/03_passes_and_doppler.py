"""
Visibility passes and Doppler over Sao Paulo
============================================

Propagates the 600-satellite Walker shell, lists the passes above a 25
degree mask in the first hour and traces Doppler across the longest one.
"""
import numpy as np

from orbitel import geometry as geo
from orbitel.handover import plan_handovers, serving_sequence

shell = geo.ConstellationShell(550.0, 53.0, n_planes=12, sats_per_plane=50, phasing_offset_deg=0.6)
site = geo.GroundSite("sao_paulo", -23.5505, -46.6333)
print(f"orbital period {shell.period_s / 60:.1f} min, speed {shell.speed_km_s:.3f} km/s")

passes = geo.pass_windows(shell, site, 25.0, 0.0, 3600.0)
print(f"\n{len(passes)} passes in the first hour")
for w in passes[:10]:
    print(f"  sat {w.sat_id:3d}: {w.rise_s:7.1f} s -> {w.set_s:7.1f} s "
          f"({w.duration_s / 60:4.2f} min, peak {w.max_elevation_deg:4.1f} deg)")

# %%
# Doppler is positive while the satellite approaches, crosses zero near the
# highest elevation and flips sign as it recedes.
full = [w for w in passes if 0.0 < w.rise_s and w.set_s < 3600.0]
best = max(full, key=lambda w: w.duration_s)
print(f"\nDoppler at 2 GHz across sat {best.sat_id}")
for t in np.linspace(best.rise_s, best.set_s, 7):
    s = geo.propagate(shell, best.sat_id, t)
    print(f"  t={t:7.1f} s  el={geo.elevation_deg(s, site):5.1f} deg  "
          f"range={geo.slant_range_km(s, site):7.1f} km  doppler={geo.doppler_hz(s, site, 2e9) / 1e3:+7.2f} kHz")
swing = geo.doppler_shift_hz(shell.speed_km_s, 2e9)
print(f"kinematic bound +/-{swing / 1e3:.1f} kHz, a {2 * swing / 1e3:.0f} kHz peak-to-peak swing")

# %%
# Chaining passes gives the serving sequence and its handovers.
chain = serving_sequence(passes)
for policy in ("make_before_break", "break_before_make"):
    gaps = [e.gap_ms for e in plan_handovers(chain, policy)]
    print(f"{policy}: {len(gaps)} handovers, max gap {max(gaps):.0f} ms")
