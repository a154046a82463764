"""
SNR to spectral efficiency, and throughput roll-ups from beam to constellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

# Guards floor() against products such as 0.3 * 20000 landing a hair under an integer.
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class McsEntry:
    min_snr_db: float
    modulation: str
    spectral_efficiency_bps_hz: float


@dataclass(frozen=True)
class McsLadder:
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("MCS ladder must have at least one entry")
        for lo, hi in zip(entries, entries[1:]):
            if not hi.min_snr_db > lo.min_snr_db:
                raise ValueError("ladder thresholds must be strictly increasing")
            if not hi.spectral_efficiency_bps_hz > lo.spectral_efficiency_bps_hz:
                raise ValueError("ladder efficiencies must be strictly increasing")
        object.__setattr__(self, "entries", entries)

    @property
    def floor_db(self) -> float:
        return self.entries[0].min_snr_db

    def lookup(self, snr_db: float) -> float:
        """Spectral efficiency at ``snr_db``; 0.0 below the lowest rung."""
        entry = select_mcs(snr_db, self)
        return 0.0 if entry is None else entry.spectral_efficiency_bps_hz

    def truncated(self, top_modulation: str) -> "McsLadder":
        names = [e.modulation for e in self.entries]
        return McsLadder(self.entries[: names.index(top_modulation) + 1])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def default_mcs_ladder() -> McsLadder:
    return McsLadder((
        McsEntry(0.0, "BPSK", 1.0),
        McsEntry(4.0, "QPSK", 2.0),
        McsEntry(7.0, "16-QAM", 4.0),
        McsEntry(15.0, "64-QAM", 6.0),
        McsEntry(25.0, "256-QAM", 8.0),
    ))


def select_mcs(snr_db: float, ladder: McsLadder) -> Optional[McsEntry]:
    """Highest rung whose threshold is met (inclusive); ``None`` below the floor."""
    chosen = None
    for entry in ladder.entries:
        if snr_db >= entry.min_snr_db:
            chosen = entry
        else:
            break
    return chosen


@dataclass(frozen=True)
class BeamConfig:
    beam_id: int = 0
    bandwidth_hz: float = 100e6
    rf_power_w: float = 10.0
    scheduler_overhead_frac: float = 0.0
    center: tuple = (0.0, 0.0)
    active: bool = True

    def __post_init__(self):
        if not 0.0 <= self.scheduler_overhead_frac < 1.0:
            raise ValueError("scheduler_overhead_frac must lie in [0, 1)")
        if not self.rf_power_w > 0:
            raise ValueError("rf_power_w must be positive")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")


@dataclass(frozen=True)
class SatelliteBudget:
    n_beams_max: int = 500
    dc_power_w: float = 20_000.0
    pa_efficiency_frac: float = 0.30
    radiator_area_m2: float = 150.0
    radiator_limit_w_m2: float = 100.0

    def __post_init__(self):
        if self.n_beams_max < 1:
            raise ValueError("n_beams_max must be positive")
        if not self.dc_power_w > 0:
            raise ValueError("dc_power_w must be positive")
        if not 0.0 < self.pa_efficiency_frac <= 1.0:
            raise ValueError("pa_efficiency_frac must lie in (0, 1]")
        if not (self.radiator_area_m2 > 0 and self.radiator_limit_w_m2 > 0):
            raise ValueError("radiator area and limit must be positive")

    @property
    def rf_power_w(self) -> float:
        return self.dc_power_w * self.pa_efficiency_frac

    @property
    def heat_rejection_w(self) -> float:
        return self.radiator_area_m2 * self.radiator_limit_w_m2

    def waste_heat_w(self, rf_power_w: float) -> float:
        """PA dissipation for a given radiated power."""
        return rf_power_w * (1.0 / self.pa_efficiency_frac - 1.0)


@dataclass(frozen=True)
class CapacityRollup:
    per_beam_mbps: float
    users_per_beam: int
    beams_per_satellite: int
    per_satellite_users: int
    per_satellite_gbps: float
    n_satellites: int
    constellation_users: int
    constellation_gbps: float


def beam_throughput_mbps(bandwidth_hz: float, se_bps_hz: float, overhead_frac: float = 0.0) -> float:
    if not 0.0 <= overhead_frac < 1.0:
        raise ValueError("overhead_frac must lie in [0, 1)")
    return bandwidth_hz * se_bps_hz * (1.0 - overhead_frac) / 1e6


def users_per_beam(throughput_mbps: float, per_user_mbps: float) -> int:
    if not per_user_mbps > 0:
        raise ValueError("per_user_mbps must be positive")
    return max(0, math.floor(throughput_mbps / per_user_mbps + _FLOOR_EPS))


def _floor_cap(x: float) -> float:
    return math.inf if math.isinf(x) else math.floor(x + _FLOOR_EPS)


def max_active_beams(budget: SatelliteBudget, per_beam_rf_w: float) -> int:
    """Beams that fit under the beam-count, DC-power and radiator limits."""
    if not per_beam_rf_w > 0:
        raise ValueError("per_beam_rf_w must be positive")
    power_cap = _floor_cap(budget.rf_power_w / per_beam_rf_w)
    heat_per_beam = budget.waste_heat_w(per_beam_rf_w)
    thermal_cap = math.inf if heat_per_beam <= 0 else _floor_cap(budget.heat_rejection_w / heat_per_beam)
    return int(min(budget.n_beams_max, power_cap, thermal_cap))


def apply_reuse(bandwidth_hz: float, reuse_factor: int) -> float:
    if reuse_factor < 1:
        raise ValueError("reuse_factor must be >= 1")
    return bandwidth_hz / reuse_factor


def satellite_rollup(n_beams: int, per_beam_mbps: float, per_user_mbps: float):
    """(users_per_beam, per_satellite_users, per_satellite_gbps) for one satellite."""
    upb = users_per_beam(per_beam_mbps, per_user_mbps)
    return upb, n_beams * upb, n_beams * per_beam_mbps / 1e3


def constellation_rollup(
    n_sats: int,
    per_sat_users: int,
    per_sat_gbps: float,
    per_beam_mbps: float = 0.0,
    users_per_beam: int = 0,
    beams_per_satellite: int = 0,
) -> CapacityRollup:
    if min(n_sats, per_sat_users, per_sat_gbps, per_beam_mbps, users_per_beam, beams_per_satellite) < 0:
        raise ValueError("roll-up inputs must be non-negative")
    return CapacityRollup(
        per_beam_mbps=per_beam_mbps,
        users_per_beam=users_per_beam,
        beams_per_satellite=beams_per_satellite,
        per_satellite_users=per_sat_users,
        per_satellite_gbps=per_sat_gbps,
        n_satellites=n_sats,
        constellation_users=n_sats * per_sat_users,
        constellation_gbps=n_sats * per_sat_gbps,
    )


@dataclass(frozen=True)
class CoverageVerdict:
    passed: bool
    available_gbps: float
    required_gbps: float
    shortfall_gbps: float


def city_coverage_check(rollup: CapacityRollup, required_gbps: float, sats_over_city: int = 1) -> CoverageVerdict:
    """Compare the capacity of the satellites overhead a city with its peak demand."""
    available = rollup.per_satellite_gbps * min(sats_over_city, rollup.n_satellites)
    shortfall = max(0.0, required_gbps - available)
    return CoverageVerdict(shortfall == 0.0, available, required_gbps, shortfall)


__all__ = [
    "McsEntry", "McsLadder", "default_mcs_ladder", "select_mcs", "BeamConfig",
    "SatelliteBudget", "CapacityRollup", "beam_throughput_mbps", "users_per_beam",
    "max_active_beams", "apply_reuse", "satellite_rollup", "constellation_rollup",
    "CoverageVerdict", "city_coverage_check",
]
