"""
Per-slot beam and bandwidth allocation.

A slot is scheduled in three stages: beams are admitted under the satellite
power/thermal budget (highest aggregate user priority first), users are
associated to the beam covering their cell, and each beam's bandwidth is
filled greedily in an order set by the policy. Ties are always broken by
ascending identifier so that allocations are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

from .capacity import BeamConfig, McsLadder, SatelliteBudget, default_mcs_ladder, select_mcs
from .constants import EARTH_RADIUS_KM
from .geometry import GroundSite
from .urban_channel import EnvironmentClass

DEFAULT_SLOT_MS = 10.0
PF_SMOOTHING = 0.1
_BW_TOL_HZ = 1e-3


class Policy(str, Enum):
    MAX_THROUGHPUT = "max_throughput"
    PROPORTIONAL_FAIR = "proportional_fair"
    WEIGHTED_ROUND_ROBIN = "weighted_round_robin"


@dataclass(frozen=True)
class UserDemand:
    user_id: int
    requested_mbps: float
    snr_db: float
    priority_weight: float = 1.0
    beam_id: Optional[int] = None
    site: Optional[GroundSite] = None
    env: Optional[EnvironmentClass] = None

    def __post_init__(self):
        if not self.requested_mbps > 0:
            raise ValueError(f"user {self.user_id}: requested_mbps must be > 0")
        if not self.priority_weight > 0:
            raise ValueError(f"user {self.user_id}: priority_weight must be > 0")


@dataclass(frozen=True)
class AllocationEntry:
    beam_id: int
    user_id: int
    bandwidth_hz: float
    mcs: str
    spectral_efficiency_bps_hz: float
    granted_mbps: float
    requested_mbps: float
    priority_weight: float = 1.0


@dataclass(frozen=True)
class Allocation:
    slot_index: int
    entries: tuple = ()
    beam_bandwidth_hz: dict = field(default_factory=dict)
    beam_power_w: dict = field(default_factory=dict)
    beam_capacity_mbps: dict = field(default_factory=dict)
    diagnostics: tuple = ()

    @property
    def active_beams(self) -> tuple:
        return tuple(sorted(self.beam_power_w))

    @property
    def total_granted_mbps(self) -> float:
        return math.fsum(e.granted_mbps for e in self.entries)

    def served_users(self) -> set:
        return {e.user_id for e in self.entries if e.granted_mbps > 0}

    def beam_priority(self) -> dict:
        agg = {b: 0.0 for b in self.beam_power_w}
        for e in self.entries:
            agg[e.beam_id] = agg.get(e.beam_id, 0.0) + e.priority_weight
        return agg


# --- geometry helpers for cells and fences -------------------------------

def great_circle_km(lat1, lon1, lat2, lon2) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def nearest_beam(lat: float, lon: float, beams: Sequence[BeamConfig]) -> int:
    return min(beams, key=lambda b: (great_circle_km(lat, lon, *b.center), b.beam_id)).beam_id


@dataclass(frozen=True)
class CircleRegion:
    latitude_deg: float
    longitude_deg: float
    radius_km: float

    def contains(self, lat: float, lon: float) -> bool:
        # strict interior: a point on the rim is outside
        return great_circle_km(self.latitude_deg, self.longitude_deg, lat, lon) < self.radius_km


@dataclass(frozen=True)
class PolygonRegion:
    """Polygon in (lat, lon) degrees, treated as planar; boundary is outside."""

    vertices: tuple

    def contains(self, lat: float, lon: float) -> bool:
        pts = list(self.vertices)
        inside = False
        for (y1, x1), (y2, x2) in zip(pts, pts[1:] + pts[:1]):
            cross = (x2 - x1) * (lat - y1) - (y2 - y1) * (lon - x1)
            if abs(cross) < 1e-12 and min(x1, x2) <= lon <= max(x1, x2) and min(y1, y2) <= lat <= max(y1, y2):
                return False
            if (y1 > lat) != (y2 > lat):
                x_at = x1 + (lat - y1) * (x2 - x1) / (y2 - y1)
                if lon < x_at:
                    inside = not inside
        return inside


def geofence_mask(beams: Sequence[BeamConfig], forbidden_regions: Iterable = ()) -> list[BeamConfig]:
    regions = list(forbidden_regions)
    out = []
    for b in beams:
        if b.active and any(r.contains(*b.center) for r in regions):
            b = replace(b, active=False)
        out.append(b)
    return out


# --- beam hopping ---------------------------------------------------------

@dataclass(frozen=True)
class HopPlan:
    epoch_slots: int
    slots: tuple
    counts: dict
    unserved_cells: tuple = ()
    diagnostics: tuple = ()

    def illuminated(self, slot_index: int) -> frozenset:
        return self.slots[slot_index % self.epoch_slots]


def beam_hop_plan(cells, n_active: int, epoch_slots: int, demand_per_cell=None) -> HopPlan:
    """Spread ``n_active * epoch_slots`` illuminations over cells by demand.

    Every servable cell is lit at least once per epoch and at most once per
    slot. Extra illuminations go to the cell with the largest
    ``weight / (count + 0.5)`` (Sainte-Lague order), ties to the earlier cell.
    """
    if epoch_slots < 1 or n_active < 1:
        raise ValueError("epoch_slots and n_active must be >= 1")
    cells = list(cells)
    weights = [1.0] * len(cells) if demand_per_cell is None else [float(w) for w in demand_per_cell]
    if len(weights) != len(cells):
        raise ValueError("demand_per_cell must match cells")
    if any(w < 0 for w in weights):
        raise ValueError("demand weights must be non-negative")

    capacity = n_active * epoch_slots
    order = sorted(range(len(cells)), key=lambda i: (-weights[i], i))
    keep = sorted(order[:capacity])
    unserved = tuple(cells[i] for i in sorted(order[capacity:]))
    diagnostics = ()
    if unserved:
        diagnostics = (f"{len(unserved)} cell(s) unservable: {len(cells)} cells exceed "
                       f"{n_active} beams x {epoch_slots} slots",)

    counts = {i: 1 for i in keep}
    spare = min(capacity, len(keep) * epoch_slots) - len(keep)
    for _ in range(spare):
        best = max(
            (i for i in keep if counts[i] < epoch_slots),
            key=lambda i: (weights[i] / (counts[i] + 0.5), -i),
        )
        counts[best] += 1

    slots = [set() for _ in range(epoch_slots)]
    k = 0
    for i in keep:
        for _ in range(counts[i]):
            slots[k % epoch_slots].add(cells[i])
            k += 1
    return HopPlan(
        epoch_slots=epoch_slots,
        slots=tuple(frozenset(s) for s in slots),
        counts={cells[i]: counts[i] for i in keep},
        unserved_cells=unserved,
        diagnostics=diagnostics,
    )


# --- slot scheduling ------------------------------------------------------

@dataclass
class SchedulerState:
    """Fairness memory carried between slots of one simulation."""

    pf_smoothing: float = PF_SMOOTHING
    avg_rate_mbps: dict = field(default_factory=dict)
    last_served: dict = field(default_factory=dict)
    wrr_next: dict = field(default_factory=dict)
    slot_index: int = 0


def select_active_beams(beams: Sequence[BeamConfig], budget: SatelliteBudget, priority: dict):
    """Admit beams by descending aggregate priority until a budget binds."""
    candidates = sorted((b for b in beams if b.active), key=lambda b: (-priority.get(b.beam_id, 0.0), b.beam_id))
    chosen, rf, heat = [], 0.0, 0.0
    for b in candidates:
        if len(chosen) >= budget.n_beams_max:
            break
        b_heat = budget.waste_heat_w(b.rf_power_w)
        if rf + b.rf_power_w > budget.rf_power_w * (1 + 1e-12):
            continue
        if heat + b_heat > budget.heat_rejection_w * (1 + 1e-12):
            continue
        chosen.append(b)
        rf += b.rf_power_w
        heat += b_heat
    return chosen


def _order_users(policy, users, rates, state, beam_id):
    if policy is Policy.MAX_THROUGHPUT:
        return sorted(users, key=lambda u: (-rates[u.user_id], u.user_id))
    if policy is Policy.PROPORTIONAL_FAIR:
        now = state.slot_index
        guard = max(1, len(users) // 2)

        def key(u):
            age = now - state.last_served.get(u.user_id, -math.inf)
            starving = age > guard
            metric = rates[u.user_id] / max(state.avg_rate_mbps.get(u.user_id, 0.0), 1e-12)
            return (not starving, -age if starving else 0.0, -metric, u.user_id)

        return sorted(users, key=key)
    ordered = sorted(users, key=lambda u: u.user_id)
    start = state.wrr_next.get(beam_id, 0)
    pos = next((k for k, u in enumerate(ordered) if u.user_id >= start), 0)
    return ordered[pos:] + ordered[:pos]


def schedule_slot(
    users: Sequence[UserDemand],
    beams: Sequence[BeamConfig],
    policy=Policy.MAX_THROUGHPUT,
    budget: Optional[SatelliteBudget] = None,
    state: Optional[SchedulerState] = None,
    ladder: Optional[McsLadder] = None,
) -> Allocation:
    """Allocate one slot.

    Users whose SNR is below the ladder floor are not admissible. Under
    ``weighted_round_robin`` each visit grants up to ``weight / max_weight``
    of the request, starting from where the previous slot stopped.
    ``state`` is updated in place when given.
    """
    if not beams:
        raise ValueError("schedule_slot needs at least one beam")
    policy = Policy(policy)
    budget = budget or SatelliteBudget()
    state = state if state is not None else SchedulerState()
    ladder = ladder or default_mcs_ladder()
    slot = state.slot_index

    beam_by_id = {b.beam_id: b for b in beams}
    mcs, by_beam, priority = {}, {}, {}
    for u in users:
        entry = select_mcs(u.snr_db, ladder)
        if entry is None:
            continue
        if u.beam_id is not None:
            bid = u.beam_id
        elif u.site is not None:
            bid = nearest_beam(u.site.latitude_deg, u.site.longitude_deg, beams)
        else:
            continue
        if bid not in beam_by_id:
            continue
        mcs[u.user_id] = entry
        by_beam.setdefault(bid, []).append(u)
        priority[bid] = priority.get(bid, 0.0) + u.priority_weight

    active = select_active_beams(beams, budget, priority)
    diagnostics = []
    if not active:
        diagnostics.append("infeasible budget: no beam fits the power/thermal limits"
                           if any(b.active for b in beams) else "no active beams")

    entries = []
    beam_bw, beam_pw, beam_cap = {}, {}, {}
    for beam in sorted(active, key=lambda b: b.beam_id):
        bid = beam.beam_id
        beam_bw[bid] = beam.bandwidth_hz
        beam_pw[bid] = beam.rf_power_w
        eff = 1.0 - beam.scheduler_overhead_frac
        members = by_beam.get(bid, [])
        rates = {u.user_id: mcs[u.user_id].spectral_efficiency_bps_hz for u in members}
        beam_cap[bid] = beam.bandwidth_hz * eff * max(rates.values(), default=0.0) / 1e6
        max_w = max((u.priority_weight for u in members), default=1.0)
        remaining = beam.bandwidth_hz
        last_served = None
        for u in _order_users(policy, members, rates, state, bid):
            if remaining <= _BW_TOL_HZ:
                break
            se = rates[u.user_id]
            cap = u.requested_mbps
            if policy is Policy.WEIGHTED_ROUND_ROBIN:
                cap *= u.priority_weight / max_w
            bw = min(cap * 1e6 / (se * eff), remaining)
            granted = min(bw * se * eff / 1e6, cap)
            remaining -= bw
            entries.append(AllocationEntry(bid, u.user_id, bw, mcs[u.user_id].modulation, se,
                                           granted, u.requested_mbps, u.priority_weight))
            last_served = u.user_id
        if policy is Policy.WEIGHTED_ROUND_ROBIN and last_served is not None:
            state.wrr_next[bid] = last_served + 1

    granted_by_user = {e.user_id: e.granted_mbps for e in entries}
    a = state.pf_smoothing
    for u in users:
        g = granted_by_user.get(u.user_id, 0.0)
        state.avg_rate_mbps[u.user_id] = (1 - a) * state.avg_rate_mbps.get(u.user_id, 0.0) + a * g
        if g > 0:
            state.last_served[u.user_id] = slot
    state.slot_index += 1
    return Allocation(slot, tuple(entries), beam_bw, beam_pw, beam_cap, tuple(diagnostics))


def thermal_throttle(alloc: Allocation, budget: SatelliteBudget) -> Allocation:
    """Switch off the lowest-priority beams until radiator capacity suffices."""
    power = dict(alloc.beam_power_w)
    heat = math.fsum(budget.waste_heat_w(p) for p in power.values())
    if heat <= budget.heat_rejection_w:
        return alloc
    priority = alloc.beam_priority()
    dropped = []
    for bid in sorted(power, key=lambda b: (priority.get(b, 0.0), b)):
        if heat <= budget.heat_rejection_w:
            break
        heat -= budget.waste_heat_w(power.pop(bid))
        dropped.append(bid)
    keep = set(power)
    return replace(
        alloc,
        entries=tuple(e for e in alloc.entries if e.beam_id in keep),
        beam_bandwidth_hz={b: v for b, v in alloc.beam_bandwidth_hz.items() if b in keep},
        beam_power_w=power,
        beam_capacity_mbps={b: v for b, v in alloc.beam_capacity_mbps.items() if b in keep},
        diagnostics=alloc.diagnostics + (f"thermal throttle: beams {dropped} deactivated",),
    )


def audit_allocation(alloc: Allocation, budget: SatelliteBudget) -> list[str]:
    """Return every constraint the allocation violates (empty when feasible)."""
    problems = []
    used = {}
    seen = set()
    for e in alloc.entries:
        used[e.beam_id] = used.get(e.beam_id, 0.0) + e.bandwidth_hz
        if e.user_id in seen:
            problems.append(f"user {e.user_id} has more than one entry")
        seen.add(e.user_id)
        if e.granted_mbps > e.requested_mbps * (1 + 1e-12):
            problems.append(f"user {e.user_id} granted more than requested")
        if e.beam_id not in alloc.beam_power_w:
            problems.append(f"user {e.user_id} served by inactive beam {e.beam_id}")
    for bid, bw in used.items():
        if bw > alloc.beam_bandwidth_hz.get(bid, 0.0) + _BW_TOL_HZ:
            problems.append(f"beam {bid} bandwidth exceeded")
    if len(alloc.beam_power_w) > budget.n_beams_max:
        problems.append("beam count exceeds n_beams_max")
    rf = math.fsum(alloc.beam_power_w.values())
    if rf > budget.rf_power_w * (1 + 1e-9):
        problems.append(f"RF power {rf:.1f} W exceeds {budget.rf_power_w:.1f} W")
    heat = math.fsum(budget.waste_heat_w(p) for p in alloc.beam_power_w.values())
    if heat > budget.heat_rejection_w * (1 + 1e-9):
        problems.append(f"waste heat {heat:.1f} W exceeds radiator {budget.heat_rejection_w:.1f} W")
    return problems
