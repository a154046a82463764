"""
Scheduling a beam: throughput against fairness
==============================================

Forty users share one 100 MHz beam with mixed link quality. The three
policies trade total throughput for how evenly service is spread. A
beam-hopping plan then spreads four beams over seven cells.
"""
import numpy as np

from orbitel import scheduler as sch
from orbitel.capacity import BeamConfig, SatelliteBudget

rng = np.random.default_rng(3)
users = [sch.UserDemand(i, 25.0, float(snr), 1.0, 0) for i, snr in enumerate(rng.uniform(1, 30, 40))]
beam = BeamConfig(0, 100e6)
budget = SatelliteBudget()

print("policy                 mean_Mbps/slot  users_served_over_40_slots  worst_wait_slots")
for policy in sch.Policy:
    state = sch.SchedulerState()
    totals, last, wait = [], {}, 0
    for k in range(40):
        alloc = sch.schedule_slot(users, [beam], policy, budget, state)
        totals.append(alloc.total_granted_mbps)
        for u in alloc.served_users():
            wait = max(wait, k - last.get(u, -1) - 1)
            last[u] = k
    never = 40 - len(last)
    print(f"{policy.value:22s} {np.mean(totals):14.1f}  {len(last):26d}  "
          f"{wait if never == 0 else 'never (' + str(never) + ' users)'}")

# %%
# Beam hopping: seven cells, four beams, an eight-slot epoch, demand skewed
# towards the centre cell.
demand = [12, 4, 4, 3, 3, 2, 2]
plan = sch.beam_hop_plan(list(range(7)), 4, 8, demand)
print("\ncell  demand  slots_lit")
for cell, d in enumerate(demand):
    print(f"{cell:4d}  {d:6d}  {plan.counts[cell]:9d}")
for k in range(plan.epoch_slots):
    print(f"slot {k}: {sorted(plan.illuminated(k))}")
