"""
Circular-orbit propagation, visibility and Doppler.

Spherical Earth, two-body circular motion, no perturbations. Positions are
expressed in an Earth-centred inertial frame whose x-axis coincides with the
Greenwich meridian at ``t = 0``; ground sites rotate with the Earth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .constants import (
    DEFAULT_ELEVATION_MASK_DEG,
    EARTH_MU_KM3_S2,
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RAD_S,
    SPEED_OF_LIGHT_KM_S,
)

# Pass boundaries are refined well below the 0.1 s contract.
_BISECT_XTOL_S = 1e-4


@dataclass(frozen=True)
class ConstellationShell:
    """Walker-delta shell: ``n_planes`` planes spread over 360 deg of RAAN."""

    altitude_km: float
    inclination_deg: float
    n_planes: int = 1
    sats_per_plane: int = 1
    phasing_offset_deg: float = 0.0
    epoch_s: float = 0.0

    def __post_init__(self):
        if not self.altitude_km > 0:
            raise ValueError(f"altitude_km must be > 0, got {self.altitude_km}")
        if self.n_planes < 1:
            raise ValueError(f"n_planes must be >= 1, got {self.n_planes}")
        if self.sats_per_plane < 1:
            raise ValueError(f"sats_per_plane must be >= 1, got {self.sats_per_plane}")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError(
                f"inclination_deg must lie in [0, 180], got {self.inclination_deg}"
            )

    @property
    def n_sats(self) -> int:
        return self.n_planes * self.sats_per_plane

    @property
    def radius_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km

    @property
    def mean_motion_rad_s(self) -> float:
        return math.sqrt(EARTH_MU_KM3_S2 / self.radius_km**3)

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.mean_motion_rad_s

    @property
    def speed_km_s(self) -> float:
        return math.sqrt(EARTH_MU_KM3_S2 / self.radius_km)


@dataclass(frozen=True)
class SatelliteState:
    sat_id: int
    position: np.ndarray
    velocity: np.ndarray
    time_s: float
    plane: int = 0
    slot: int = 0


@dataclass(frozen=True)
class GroundSite:
    site_id: str
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude_deg out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude_deg out of range: {self.longitude_deg}")


@dataclass(frozen=True)
class PassWindow:
    sat_id: int
    rise_s: float
    set_s: float
    max_elevation_deg: float

    @property
    def duration_s(self) -> float:
        return self.set_s - self.rise_s


def _plane_basis(shell: ConstellationShell, plane: np.ndarray):
    """In-plane unit vectors (ascending node direction, 90 deg ahead)."""
    raan = np.radians(360.0 * plane / shell.n_planes)
    inc = math.radians(shell.inclination_deg)
    e1 = np.stack([np.cos(raan), np.sin(raan), np.zeros_like(raan)], axis=-1)
    e2 = np.stack(
        [-math.cos(inc) * np.sin(raan), math.cos(inc) * np.cos(raan),
         np.full_like(raan, math.sin(inc))],
        axis=-1,
    )
    return e1, e2


def _argument_of_latitude(shell, plane, slot, t):
    u0 = np.radians(360.0 * slot / shell.sats_per_plane + plane * shell.phasing_offset_deg)
    return u0 + shell.mean_motion_rad_s * (np.asarray(t, dtype=float) - shell.epoch_s)


def shell_states(shell: ConstellationShell, t, sat_indices: Optional[Sequence[int]] = None):
    """Vectorised propagation.

    Returns ``(positions, velocities)`` with shape ``(n_t, n_sat, 3)`` for an
    array of times, or ``(n_sat, 3)`` for a scalar time.
    """
    idx = np.arange(shell.n_sats) if sat_indices is None else np.asarray(sat_indices)
    plane = idx // shell.sats_per_plane
    slot = idx % shell.sats_per_plane
    e1, e2 = _plane_basis(shell, plane)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    u = _argument_of_latitude(shell, plane[None, :], slot[None, :], t_arr[:, None])
    cu, su = np.cos(u)[..., None], np.sin(u)[..., None]
    r, n = shell.radius_km, shell.mean_motion_rad_s
    pos = r * (cu * e1 + su * e2)
    vel = r * n * (-su * e1 + cu * e2)
    if np.ndim(t) == 0:
        return pos[0], vel[0]
    return pos, vel


def propagate(shell: ConstellationShell, sat_index: int, t: float) -> SatelliteState:
    if not 0 <= sat_index < shell.n_sats:
        raise IndexError(
            f"sat_index {sat_index} out of range for shell with {shell.n_sats} satellites"
        )
    pos, vel = shell_states(shell, float(t), [sat_index])
    return SatelliteState(
        sat_id=sat_index,
        position=pos[0],
        velocity=vel[0],
        time_s=float(t),
        plane=sat_index // shell.sats_per_plane,
        slot=sat_index % shell.sats_per_plane,
    )


def propagate_all(shell: ConstellationShell, t: float) -> list[SatelliteState]:
    pos, vel = shell_states(shell, float(t))
    return [
        SatelliteState(i, pos[i], vel[i], float(t), i // shell.sats_per_plane,
                       i % shell.sats_per_plane)
        for i in range(shell.n_sats)
    ]


def site_position_km(site: GroundSite, t=0.0) -> np.ndarray:
    r = EARTH_RADIUS_KM + site.altitude_m / 1000.0
    lat = math.radians(site.latitude_deg)
    lon = math.radians(site.longitude_deg) + EARTH_ROTATION_RAD_S * np.asarray(t, dtype=float)
    return r * np.stack(
        [math.cos(lat) * np.cos(lon), math.cos(lat) * np.sin(lon),
         np.full_like(lon, math.sin(lat))],
        axis=-1,
    )


def site_velocity_km_s(site: GroundSite, t=0.0) -> np.ndarray:
    p = site_position_km(site, t)
    return EARTH_ROTATION_RAD_S * np.stack(
        [-p[..., 1], p[..., 0], np.zeros_like(p[..., 2])], axis=-1
    )


def slant_range_km(sat: SatelliteState, site: GroundSite) -> float:
    return float(np.linalg.norm(sat.position - site_position_km(site, sat.time_s)))


def _elevation_from_vectors(sat_pos, site_pos):
    rho = sat_pos - site_pos
    up = site_pos / np.linalg.norm(site_pos, axis=-1, keepdims=True)
    s = np.sum(rho * up, axis=-1) / np.linalg.norm(rho, axis=-1)
    return np.degrees(np.arcsin(np.clip(s, -1.0, 1.0)))


def elevation_deg(sat: SatelliteState, site: GroundSite) -> float:
    return float(_elevation_from_vectors(sat.position, site_position_km(site, sat.time_s)))


def doppler_shift_hz(radial_velocity_km_s: float, carrier_hz: float) -> float:
    """First-order shift for a line-of-sight closing speed (positive = approaching)."""
    return radial_velocity_km_s / SPEED_OF_LIGHT_KM_S * carrier_hz


def radial_velocity_km_s(sat: SatelliteState, site: GroundSite) -> float:
    rho = sat.position - site_position_km(site, sat.time_s)
    rel_v = sat.velocity - site_velocity_km_s(site, sat.time_s)
    return float(-np.dot(rho, rel_v) / np.linalg.norm(rho))


def doppler_hz(sat: SatelliteState, site: GroundSite, carrier_hz: float) -> float:
    if not carrier_hz > 0:
        raise ValueError(f"carrier_hz must be > 0, got {carrier_hz}")
    return doppler_shift_hz(radial_velocity_km_s(sat, site), carrier_hz)


def elevations_over_time(shell, site, times, sat_indices=None) -> np.ndarray:
    """Elevation grid of shape ``(n_t, n_sat)``."""
    times = np.asarray(times, dtype=float)
    pos, _ = shell_states(shell, times, sat_indices)
    site_pos = site_position_km(site, times)[:, None, :]
    return _elevation_from_vectors(pos, site_pos)


def _elevation_at(shell, sat_index, site, t) -> float:
    pos, _ = shell_states(shell, float(t), [sat_index])
    return float(_elevation_from_vectors(pos[0], site_position_km(site, float(t))))


def pass_windows(
    shell: ConstellationShell,
    site: GroundSite,
    min_elevation_deg: float = DEFAULT_ELEVATION_MASK_DEG,
    t0: float = 0.0,
    t1: float = 86400.0,
    step_s: float = 10.0,
    sat_indices: Optional[Iterable[int]] = None,
) -> list[PassWindow]:
    """Visibility windows above ``min_elevation_deg`` within ``[t0, t1]``.

    Windows are found on a ``step_s`` grid and their edges are refined by
    bisection; windows touching ``t0``/``t1`` are clipped there. The result is
    sorted by rise time, then satellite id.
    """
    if not t1 > t0:
        raise ValueError("t1 must be greater than t0")
    if not step_s > 0:
        raise ValueError("step_s must be positive")
    idx = list(range(shell.n_sats)) if sat_indices is None else sorted(set(sat_indices))
    n_steps = int(math.ceil((t1 - t0) / step_s))
    times = np.minimum(t0 + step_s * np.arange(n_steps + 1), t1)
    el = elevations_over_time(shell, site, times, idx)
    above = el >= min_elevation_deg

    windows = []
    for col, sat in enumerate(idx):
        mask = above[:, col]
        if not mask.any():
            continue
        f = lambda t, s=sat: _elevation_at(shell, s, site, t) - min_elevation_deg
        edges = np.flatnonzero(np.diff(mask.astype(np.int8)))
        starts = [0] if mask[0] else []
        ends = []
        for e in edges:
            if mask[e + 1]:
                starts.append(e + 1)
            else:
                ends.append(e)
        if mask[-1]:
            ends.append(len(mask) - 1)
        for i0, i1 in zip(starts, ends):
            rise = times[i0] if i0 == 0 else brentq(f, times[i0 - 1], times[i0], xtol=_BISECT_XTOL_S)
            if i1 == len(mask) - 1:
                set_ = times[i1]
            else:
                set_ = brentq(f, times[i1], times[i1 + 1], xtol=_BISECT_XTOL_S)
            if not set_ > rise:
                continue
            peak = int(np.argmax(el[i0:i1 + 1, col])) + i0
            lo = max(rise, times[max(peak - 1, 0)])
            hi = min(set_, times[min(peak + 1, len(times) - 1)])
            best = el[peak, col]
            if hi > lo:
                res = minimize_scalar(
                    lambda t, s=sat: -_elevation_at(shell, s, site, t),
                    bounds=(lo, hi), method="bounded", options={"xatol": 1e-3},
                )
                best = max(best, -res.fun)
            windows.append(PassWindow(sat, float(rise), float(set_), float(best)))
    windows.sort(key=lambda w: (w.rise_s, w.sat_id))
    return windows
