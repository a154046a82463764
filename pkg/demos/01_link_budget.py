"""
Downlink link budget from a 550 km satellite to a handset
=========================================================

Walks the worked example step by step, then repeats it in the dimensionally
consistent mode that the simulator uses, and finally sweeps elevation.
Run with ``python demos/01_link_budget.py``.
"""
import numpy as np

from orbitel import link_budget as lb
from orbitel.capacity import default_mcs_ladder, select_mcs
from orbitel.constants import EARTH_RADIUS_KM

# %%
# Step by step: path loss at zenith, dense-city excess loss, a 1 MHz noise
# floor and a 3 dB implementation margin.
path_loss = lb.fspl_db(550.0, 2.0)
print(f"free-space path loss at 550 km, 2 GHz: {path_loss:.2f} dB")
print(f"noise floor, 290 K over 1 MHz:        {lb.noise_power_dbm(290, 1e6):.2f} dBm")
print(f"64 x 64 array gain:                   {lb.array_gain_db(64 * 64):.2f} dB")

worked = lb.LinkBudgetInput(eirp_dbw=60.0, rx_gain_over_temp_db_per_k=-17.0, path_loss_db=153.25,
                            excess_loss_db=30.0, impl_margin_db=3.0)
for gain in (0.0, 36.0):
    res = lb.snr_paper_mode(worked, gain, noise_db=-114.0)
    print(f"\nworked example, array gain {gain:.0f} dB")
    for line in res.ledger_lines():
        print("   ", line)

# %%
# The same link with temperature counted once and noise in dBW. The handset
# has -3 dBi of gain and no G/T term.
physical = lb.snr_physical_mode(lb.LinkBudgetInput(eirp_dbw=60.0, path_loss_db=path_loss, excess_loss_db=30.0))
print("\nphysical mode")
for line in physical.ledger_lines():
    print("   ", line)

# %%
# Elevation sweep. Slant range grows from 550 km overhead to about 1100 km
# at the 25 degree mask, costing roughly 6 dB.
ladder = default_mcs_ladder()
r = EARTH_RADIUS_KM + 550.0
print("\nelevation  range_km  rooftop_snr  street_snr  rooftop_mcs")
for el in (90, 60, 45, 35, 25):
    e = np.radians(el)
    d = np.sqrt(r**2 - (EARTH_RADIUS_KM * np.cos(e)) ** 2) - EARTH_RADIUS_KM * np.sin(e)
    snr = {}
    for tag, ls in (("rooftop", 0.0), ("street", 30.0)):
        inp = lb.LinkBudgetInput(eirp_dbw=65.0, path_loss_db=lb.fspl_db(d, 2.0), excess_loss_db=ls,
                                 bandwidth_hz=100e6)
        snr[tag] = lb.snr_physical_mode(inp).snr_db
    mcs = select_mcs(snr["rooftop"], ladder)
    print(f"{el:9d}  {d:8.1f}  {snr['rooftop']:11.2f}  {snr['street']:10.2f}  {mcs.modulation if mcs else '-'}")
