"""
From one beam to a constellation
================================

Beam throughput, users per beam, the power and radiator limits on beam
count, and whether the satellites overhead can carry a megacity's peak.
"""
import numpy as np

from orbitel import capacity as cap

ladder = cap.default_mcs_ladder()

# %%
# One 100 MHz beam at 16-QAM, with and without scheduler overhead.
for overhead in (0.0, 0.15, 0.20, 0.25):
    mbps = cap.beam_throughput_mbps(100e6, ladder.lookup(7.0), overhead)
    print(f"overhead {overhead:4.0%}: {mbps:6.1f} Mbps per beam, "
          f"{cap.users_per_beam(mbps, 10.0)} users at 10 Mbps")

# %%
# Beam count is the tightest of three limits: the array's beam count, DC
# power through the amplifier efficiency, and heat the radiator can reject.
budget = cap.SatelliteBudget(n_beams_max=500, dc_power_w=20_000.0, pa_efficiency_frac=0.3)
print(f"\nRF power {budget.rf_power_w:.0f} W, radiator {budget.heat_rejection_w:.0f} W")
for rf in (5.0, 10.0, 20.0, 40.0):
    print(f"  {rf:4.0f} W per beam -> {cap.max_active_beams(budget, rf)} beams")

# %%
# Frequency reuse divides the spectrum between neighbouring beams.
print("\nreuse  beam_bw_MHz  beam_Mbps")
for k in (1, 3, 4, 7):
    bw = cap.apply_reuse(300e6, k)
    print(f"{k:5d}  {bw / 1e6:11.1f}  {cap.beam_throughput_mbps(bw, 4.0):9.1f}")

# %%
# Satellite and constellation totals.
n_beams = cap.max_active_beams(budget, 10.0)
upb, users, gbps = cap.satellite_rollup(n_beams, 400.0, 10.0)
rollup = cap.constellation_rollup(600, users, gbps, 400.0, upb, n_beams)
print(f"\n{n_beams} beams x {upb} users = {users} users and {gbps:.0f} Gbps per satellite")
print(f"600 satellites: {rollup.constellation_users:,} users, {rollup.constellation_gbps / 1e3:.0f} Tbps")

# %%
# A city needing 100 to 200 Gbps at peak, with one or two satellites overhead
# at 300 Mbps effective per beam.
eff = cap.constellation_rollup(600, 15_000, 150.0)
for need in np.array([100.0, 150.0, 200.0]):
    for overhead in (1, 2):
        v = cap.city_coverage_check(eff, need, overhead)
        print(f"need {need:5.0f} Gbps with {overhead} satellite(s): "
              f"{'ok' if v.passed else f'short by {v.shortfall_gbps:.0f} Gbps'}")
