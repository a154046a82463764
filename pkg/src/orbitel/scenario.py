"""
Scenario configuration, the simulation loop, reports and KPI checks.

A scenario is a TOML file (``schema_version = 1``). Each geometry step
(``timestep_s``) propagates the constellation, picks the serving satellite
from the handover chain, evaluates every user's link, then schedules a number
of short slots (``scheduler.slot_ms``) inside the step. Report rows hold one
line per geometry step.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import capacity as cap
from . import geometry as geo
from . import handover as ho
from . import link_budget as lb
from . import mesh
from . import scheduler as sch
from . import urban_channel as uc
from .constants import DEFAULT_ELEVATION_MASK_DEG, EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S

SCHEMA_VERSION = 1
PRESETS = ("paper_s4", "megacity_2040", "walker_600", "grade_2025")


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioParseError(ScenarioError):
    pass


# --- configuration --------------------------------------------------------

@dataclass(frozen=True)
class CityConfig:
    name: str = "city"
    latitude_deg: float = 0.0
    longitude_deg: float = 0.0
    radius_km: float = 10.0

    @property
    def site(self) -> geo.GroundSite:
        return geo.GroundSite(self.name, self.latitude_deg, self.longitude_deg)


@dataclass(frozen=True)
class UserPopulation:
    count: int = 100
    per_user_mbps: float = 10.0
    priority_weight: float = 1.0
    service_class: str = "data"
    environment_mix: dict = field(default_factory=lambda: {"street_nlos": 1.0})


@dataclass(frozen=True)
class LinkConfig:
    mode: str = lb.PHYSICAL
    carrier_ghz: float = 2.0
    eirp_dbw: float = 60.0
    rx_gain_dbi: float = lb.DEFAULT_HANDSET_GAIN_DBI
    g_over_t_db_per_k: float = -17.0
    noise_temp_k: float = lb.DEFAULT_NOISE_TEMP_K
    noise_bandwidth_hz: Optional[float] = None
    margin_db: float = lb.DEFAULT_MARGIN_DB
    array_gain_db: float = 0.0
    path_loss_db: Optional[float] = None
    relay_gain_db: float = uc.DEFAULT_RELAY_GAIN_DB
    top_modulation: Optional[str] = None


@dataclass(frozen=True)
class BeamTemplate:
    cells: int = 7
    cell_spacing_km: float = 10.0
    bandwidth_hz: float = 100e6
    rf_power_w: float = 10.0
    overhead_frac: float = 0.0
    reuse_factor: int = 1
    forbidden_circles: tuple = ()


@dataclass(frozen=True)
class SchedulerConfig:
    policy: str = sch.Policy.PROPORTIONAL_FAIR.value
    slot_ms: float = sch.DEFAULT_SLOT_MS
    slots_per_step: Optional[int] = None
    hop_epoch_slots: int = 4
    pf_smoothing: float = sch.PF_SMOOTHING


@dataclass(frozen=True)
class MeshConfig:
    terminals_per_sat: int = mesh.DEFAULT_TERMINALS
    max_link_km: float = 5000.0
    link_capacity_gbps: float = mesh.DEFAULT_LINK_GBPS
    switch_latency_ms: float = mesh.DEFAULT_SWITCH_LATENCY_MS
    breakout: str = mesh.ORBITAL
    core_sats: tuple = ()
    gateway_penalty_ms: float = 26.0
    gateways: tuple = ()
    update_s: float = 10.0


@dataclass(frozen=True)
class HandoverConfig:
    policy: str = ho.MAKE_BEFORE_BREAK
    base_gap_ms: float = ho.DEFAULT_BASE_GAP_MS
    voice_ms: float = 50.0
    data_ms: float = 200.0
    context_bytes: int = ho.DEFAULT_CONTEXT_BYTES
    kpi_target_ms: float = ho.HANDOVER_KPI_TARGET_MS


@dataclass(frozen=True)
class Scenario:
    shells: tuple
    city: CityConfig
    name: str = "scenario"
    schema_version: int = SCHEMA_VERSION
    users: UserPopulation = UserPopulation()
    link: LinkConfig = LinkConfig()
    beams: BeamTemplate = BeamTemplate()
    budget: cap.SatelliteBudget = cap.SatelliteBudget()
    ladder: cap.McsLadder = field(default_factory=cap.default_mcs_ladder)
    scheduler: SchedulerConfig = SchedulerConfig()
    mesh: MeshConfig = MeshConfig()
    handover: HandoverConfig = HandoverConfig()
    environments: tuple = field(default_factory=lambda: tuple(uc.default_environment_table()))
    elevation_mask_deg: float = DEFAULT_ELEVATION_MASK_DEG
    duration_s: float = 60.0
    timestep_s: float = 1.0
    seed: int = 0

    @property
    def n_steps(self) -> int:
        return int(round(self.duration_s / self.timestep_s))

    @property
    def n_sats(self) -> int:
        return sum(s.n_sats for s in self.shells)

    @property
    def slots_per_step(self) -> int:
        if self.scheduler.slots_per_step is not None:
            return self.scheduler.slots_per_step
        return max(1, int(round(self.timestep_s * 1e3 / self.scheduler.slot_ms)))

    @property
    def effective_ladder(self) -> cap.McsLadder:
        top = self.link.top_modulation
        return self.ladder if top is None else self.ladder.truncated(top)


def _build(cls, data: dict, section: str, converters: Optional[dict] = None):
    converters = converters or {}
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ScenarioError(f"{section}.{unknown[0]}", "unknown key")
    kwargs = {}
    for k, v in data.items():
        kwargs[k] = converters[k](v) if k in converters else v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(section, str(exc)) from exc


def _require(cond: bool, field_name: str, message: str):
    if not cond:
        raise ScenarioError(field_name, message)


def scenario_from_dict(data: dict) -> Scenario:
    data = dict(data)
    version = data.pop("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION, "schema_version", f"unsupported version {version}")

    shells_raw = data.pop("shells", None)
    if shells_raw is None:
        _require("shell" in data, "shell", "a [shell] or [[shells]] table is required")
        shells_raw = [data.pop("shell")]
    else:
        _require("shell" not in data, "shell", "give either [shell] or [[shells]], not both")
    shells = tuple(_build(geo.ConstellationShell, s, f"shells[{i}]") for i, s in enumerate(shells_raw))
    _require(len(shells) > 0, "shells", "at least one shell is required")

    _require("city" in data, "city", "a [city] table is required")
    city = _build(CityConfig, data.pop("city"), "city")

    kwargs: dict[str, Any] = {"shells": shells, "city": city}
    if "users" in data:
        kwargs["users"] = _build(UserPopulation, data.pop("users"), "users")
    if "link" in data:
        kwargs["link"] = _build(LinkConfig, data.pop("link"), "link")
    if "beams" in data:
        kwargs["beams"] = _build(BeamTemplate, data.pop("beams"), "beams", {
            "forbidden_circles": lambda v: tuple(tuple(c) for c in v)})
    if "budget" in data:
        kwargs["budget"] = _build(cap.SatelliteBudget, data.pop("budget"), "budget")
    if "ladder" in data:
        try:
            kwargs["ladder"] = cap.McsLadder(tuple(
                cap.McsEntry(float(e["min_snr_db"]), str(e["modulation"]), float(e["spectral_efficiency_bps_hz"]))
                for e in data.pop("ladder")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError("ladder", str(exc)) from exc
    if "scheduler" in data:
        kwargs["scheduler"] = _build(SchedulerConfig, data.pop("scheduler"), "scheduler")
    if "mesh" in data:
        kwargs["mesh"] = _build(MeshConfig, data.pop("mesh"), "mesh", {
            "core_sats": tuple,
            "gateways": lambda v: tuple(geo.GroundSite(**g) for g in v)})
    if "handover" in data:
        kwargs["handover"] = _build(HandoverConfig, data.pop("handover"), "handover")
    if "environments" in data:
        table = {e.tag: e for e in uc.default_environment_table()}
        for tag, spec in data.pop("environments").items():
            table[tag] = _build(uc.EnvironmentClass, {"tag": tag, **spec}, f"environments.{tag}")
        kwargs["environments"] = tuple(table.values())
    for key in ("name", "elevation_mask_deg", "duration_s", "timestep_s", "seed"):
        if key in data:
            kwargs[key] = data.pop(key)
    if data:
        raise ScenarioError(sorted(data)[0], "unknown key")
    scenario = Scenario(schema_version=version, **kwargs)
    validate_scenario(scenario)
    return scenario


def validate_scenario(s: Scenario) -> None:
    _require(s.duration_s > 0, "duration_s", "must be > 0")
    _require(s.timestep_s > 0, "timestep_s", "must be > 0")
    _require(abs(s.n_steps * s.timestep_s - s.duration_s) < 1e-9 * s.duration_s,
             "timestep_s", "must divide duration_s")
    mix = s.users.environment_mix
    _require(abs(math.fsum(mix.values()) - 1.0) < 1e-9, "users.environment_mix",
             f"fractions sum to {math.fsum(mix.values()):.6g}, expected 1")
    _require(all(v >= 0 for v in mix.values()), "users.environment_mix", "fractions must be >= 0")
    known = {e.tag for e in s.environments}
    for tag in mix:
        _require(tag in known, f"users.environment_mix.{tag}", "unknown environment class")
    _require(s.users.count >= 0, "users.count", "must be >= 0")
    _require(s.users.per_user_mbps > 0, "users.per_user_mbps", "must be > 0")
    _require(s.users.priority_weight > 0, "users.priority_weight", "must be > 0")
    _require(s.users.service_class in ("data", "voice"), "users.service_class", "must be 'data' or 'voice'")
    _require(s.link.mode in (lb.PAPER, lb.PHYSICAL), "link.mode", "must be 'paper' or 'physical'")
    _require(s.link.carrier_ghz > 0, "link.carrier_ghz", "must be > 0")
    if s.link.top_modulation is not None:
        _require(s.link.top_modulation in [e.modulation for e in s.ladder], "link.top_modulation",
                 "not a ladder modulation")
    _require(s.beams.cells >= 1, "beams.cells", "must be >= 1")
    _require(s.beams.reuse_factor >= 1, "beams.reuse_factor", "must be >= 1")
    _require(0 <= s.beams.overhead_frac < 1, "beams.overhead_frac", "must lie in [0, 1)")
    _require(s.beams.rf_power_w > 0, "beams.rf_power_w", "must be > 0")
    try:
        sch.Policy(s.scheduler.policy)
    except ValueError:
        raise ScenarioError("scheduler.policy", f"unknown policy {s.scheduler.policy!r}") from None
    _require(s.scheduler.slot_ms > 0, "scheduler.slot_ms", "must be > 0")
    _require(s.slots_per_step >= 1, "scheduler.slots_per_step", "must be >= 1")
    _require(s.mesh.breakout in (mesh.ORBITAL, mesh.GATEWAY), "mesh.breakout", "must be 'orbital' or 'gateway'")
    if s.mesh.breakout == mesh.GATEWAY:
        _require(len(s.mesh.gateways) > 0, "mesh.gateways", "gateway breakout needs at least one gateway")
    _require(all(0 <= c < s.n_sats for c in s.mesh.core_sats), "mesh.core_sats", "satellite index out of range")
    _require(s.handover.policy in (ho.MAKE_BEFORE_BREAK, ho.BREAK_BEFORE_MAKE), "handover.policy",
             "must be 'make_before_break' or 'break_before_make'")


def _preset_path(name: str):
    return resources.files("orbitel").joinpath("presets", f"{name}.toml")


def load_scenario(path) -> Scenario:
    """Load a scenario file, or a bundled preset by bare name (e.g. ``paper_s4``)."""
    p = Path(path)
    if not p.exists() and str(path) in PRESETS:
        text = _preset_path(str(path)).read_text()
        origin = f"preset {path}"
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ScenarioError("path", f"cannot read {p}: {exc}") from exc
        origin = str(p)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError("file", f"{origin}: {exc}") from exc
    return scenario_from_dict(data)


# --- geometry of the service area ------------------------------------------

def _offset_latlon(lat, lon, east_km, north_km):
    dlat = np.degrees(north_km / EARTH_RADIUS_KM)
    dlon = np.degrees(east_km / (EARTH_RADIUS_KM * np.cos(np.radians(lat))))
    return lat + dlat, lon + dlon


def hex_cell_centers(n_cells: int, spacing_km: float):
    """Axial hex spiral around the origin, as (east_km, north_km) offsets."""
    dirs = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]
    cells = [(0, 0)]
    ring = 1
    while len(cells) < n_cells:
        q, r = -ring, ring
        for dq, dr in dirs:
            for _ in range(ring):
                cells.append((q, r))
                q, r = q + dq, r + dr
        ring += 1
    out = []
    for q, r in cells[:n_cells]:
        x = spacing_km * (q + r / 2.0)
        y = spacing_km * (math.sqrt(3) / 2.0) * r
        out.append((x, y))
    return out


def make_beams(s: Scenario) -> list[cap.BeamConfig]:
    bw = cap.apply_reuse(s.beams.bandwidth_hz, s.beams.reuse_factor)
    beams = []
    for i, (x, y) in enumerate(hex_cell_centers(s.beams.cells, s.beams.cell_spacing_km)):
        lat, lon = _offset_latlon(s.city.latitude_deg, s.city.longitude_deg, x, y)
        beams.append(cap.BeamConfig(i, bw, s.beams.rf_power_w, s.beams.overhead_frac, (float(lat), float(lon))))
    regions = [sch.CircleRegion(*c) for c in s.beams.forbidden_circles]
    return sch.geofence_mask(beams, regions)


@dataclass(frozen=True)
class Population:
    lat: np.ndarray
    lon: np.ndarray
    env_tags: tuple
    beam_ids: np.ndarray


def make_population(s: Scenario, rng: np.random.Generator, beams) -> Population:
    n = s.users.count
    r = s.city.radius_km * np.sqrt(rng.random(n))
    th = 2 * np.pi * rng.random(n)
    lat, lon = _offset_latlon(s.city.latitude_deg, s.city.longitude_deg, r * np.cos(th), r * np.sin(th))
    tags = sorted(s.users.environment_mix)
    quotas = np.array([s.users.environment_mix[t] * n for t in tags])
    counts = np.floor(quotas).astype(int)
    for k in np.argsort(-(quotas - counts), kind="stable")[: n - counts.sum()]:
        counts[k] += 1
    env = np.repeat(np.arange(len(tags)), counts)
    rng.shuffle(env)
    env_tags = tuple(tags[k] for k in env)
    beam_ids = np.array([sch.nearest_beam(a, b, beams) for a, b in zip(lat, lon)], dtype=int)
    return Population(lat, lon, env_tags, beam_ids)


def _sites_eci(lat, lon, t):
    lat_r = np.radians(lat)
    lon_r = np.radians(lon) + EARTH_ROTATION_RAD_S * t
    return EARTH_RADIUS_KM * np.stack([np.cos(lat_r) * np.cos(lon_r), np.cos(lat_r) * np.sin(lon_r), np.sin(lat_r)], -1)


def _constellation_states(s: Scenario, t: float):
    pos, vel, states = [], [], []
    offset = plane_offset = 0
    for shell in s.shells:
        p, v = geo.shell_states(shell, t)
        pos.append(p)
        vel.append(v)
        for i in range(shell.n_sats):
            states.append(geo.SatelliteState(offset + i, p[i], v[i], t,
                                             plane_offset + i // shell.sats_per_plane, i % shell.sats_per_plane))
        offset += shell.n_sats
        plane_offset += shell.n_planes
    return np.concatenate(pos), np.concatenate(vel), states


def _all_passes(s: Scenario, step_s: float) -> list[geo.PassWindow]:
    out, offset = [], 0
    for shell in s.shells:
        for w in geo.pass_windows(shell, s.city.site, s.elevation_mask_deg, 0.0, s.duration_s, step_s):
            out.append(geo.PassWindow(w.sat_id + offset, w.rise_s, w.set_s, w.max_elevation_deg))
        offset += shell.n_sats
    out.sort(key=lambda w: (w.rise_s, w.sat_id))
    return out


def _serving_at(chain, t: float) -> Optional[int]:
    """Satellite serving at ``t`` along the handover chain (hand over at set time)."""
    for k, p in enumerate(chain):
        start = p.rise_s if k == 0 else max(p.rise_s, chain[k - 1].set_s)
        end = p.set_s if k + 1 < len(chain) else p.set_s
        if start <= t < end or (k + 1 == len(chain) and t == end):
            return p.sat_id
    return None


# --- report ---------------------------------------------------------------

ROW_COLUMNS = (
    "time_s", "sats_in_view", "serving_sat", "elevation_deg", "slant_range_km", "doppler_hz",
    "active_beams", "users_direct", "users_relay", "users_outage", "users_served",
    "aggregate_mbps", "beam_capacity_mbps", "grants_per_slot", "spectral_eff_bps_hz",
    "snr_p10_db", "snr_p50_db", "snr_p90_db", "mesh_hops", "rtt_p50_ms", "rtt_p95_ms", "orbital_fraction",
)
INT_COLUMNS = frozenset({"sats_in_view", "serving_sat", "mesh_hops", "users_direct", "users_relay", "users_outage", "users_served"})
GEOMETRY_COLUMNS = ("time_s", "sats_in_view", "serving_sat", "elevation_deg", "slant_range_km", "doppler_hz")


@dataclass
class ScenarioReport:
    scenario_name: str
    seed: int
    rows: list
    summary: dict

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def _pct(values, q):
    return None if len(values) == 0 else float(np.percentile(values, q))


def _user_snr(s: Scenario, path_loss, excess):
    link = s.link
    noise_bw = link.noise_bandwidth_hz or cap.apply_reuse(s.beams.bandwidth_hz, s.beams.reuse_factor)
    out = np.empty(len(path_loss))
    for k, (pl, ex) in enumerate(zip(path_loss, excess)):
        inp = lb.LinkBudgetInput(
            eirp_dbw=link.eirp_dbw, path_loss_db=float(pl), excess_loss_db=float(ex),
            rx_gain_over_temp_db_per_k=link.g_over_t_db_per_k, noise_temp_k=link.noise_temp_k,
            bandwidth_hz=noise_bw, impl_margin_db=link.margin_db, rx_gain_dbi=link.rx_gain_dbi,
        )
        res = lb.snr_paper_mode(inp, link.array_gain_db) if link.mode == lb.PAPER else lb.snr_physical_mode(inp)
        out[k] = res.snr_db
    return out


def run(s: Scenario) -> ScenarioReport:
    """Execute the scenario; deterministic for a given (scenario, seed)."""
    validate_scenario(s)
    seeds = np.random.SeedSequence(s.seed).spawn(2)
    pop_rng, chan_rng = (np.random.default_rng(x) for x in seeds)
    ladder = s.effective_ladder
    beams = make_beams(s)
    pop = make_population(s, pop_rng, beams)
    env = {e.tag: e for e in s.environments}
    means = np.array([env[t].mean_excess_loss_db for t in pop.env_tags])
    sigmas = np.array([env[t].shadowing_sigma_db for t in pop.env_tags])
    n_active_cap = min(cap.max_active_beams(s.budget, s.beams.rf_power_w), len(beams))

    passes = _all_passes(s, step_s=min(s.timestep_s, 10.0))
    chain = ho.serving_sequence(passes)
    events = ho.plan_handovers(chain, s.handover.policy, s.handover.base_gap_ms, s.handover.context_bytes)

    state = sch.SchedulerState(pf_smoothing=s.scheduler.pf_smoothing)
    policy = sch.Policy(s.scheduler.policy)
    carrier_hz = s.link.carrier_ghz * 1e9
    gateways = list(s.mesh.gateways)
    snapshot, snapshot_key = None, None
    slots_per_step = s.slots_per_step
    rows = []
    slot_counter = 0

    for step in range(s.n_steps):
        t = step * s.timestep_s
        pos, vel, states = _constellation_states(s, t)
        center = geo.site_position_km(s.city.site, t)
        el_all = geo._elevation_from_vectors(pos, center[None, :])
        row = dict.fromkeys(ROW_COLUMNS)
        row.update(time_s=float(t), sats_in_view=int(np.sum(el_all >= s.elevation_mask_deg)), serving_sat=-1,
                   active_beams=0.0, users_direct=0, users_relay=0, users_outage=s.users.count, users_served=0,
                   aggregate_mbps=0.0, beam_capacity_mbps=0.0, grants_per_slot=0.0, spectral_eff_bps_hz=0.0,
                   orbital_fraction=0.0)
        serving = _serving_at(chain, t)
        if serving is None:
            rows.append(row)
            # keep the channel stream aligned with step index
            chan_rng.standard_normal(s.users.count)
            continue

        sat = states[serving]
        row.update(serving_sat=int(serving),
                   elevation_deg=float(el_all[serving]),
                   slant_range_km=geo.slant_range_km(sat, s.city.site),
                   doppler_hz=geo.doppler_hz(sat, s.city.site, carrier_hz))

        users_pos = _sites_eci(pop.lat, pop.lon, t)
        user_range = np.linalg.norm(users_pos - sat.position, axis=-1)
        if s.link.path_loss_db is not None:
            path_loss = np.full(s.users.count, float(s.link.path_loss_db))
        else:
            path_loss = 20 * np.log10(user_range) + 20 * np.log10(s.link.carrier_ghz) + 92.45
        excess = uc.sample_excess_losses(means, sigmas, chan_rng)
        snr = _user_snr(s, path_loss, excess)
        modes = [uc.service_mode(x, ladder, s.link.relay_gain_db) for x in snr]
        eff_snr = np.where([m is uc.ServiceMode.RELAY_ASSISTED for m in modes], snr + s.link.relay_gain_db, snr)
        row.update(users_direct=sum(m is uc.ServiceMode.DIRECT for m in modes),
                   users_relay=sum(m is uc.ServiceMode.RELAY_ASSISTED for m in modes),
                   users_outage=sum(m is uc.ServiceMode.OUTAGE for m in modes),
                   snr_p10_db=_pct(snr, 10), snr_p50_db=_pct(snr, 50), snr_p90_db=_pct(snr, 90))

        demands = [
            sch.UserDemand(k, s.users.per_user_mbps, float(eff_snr[k]), s.users.priority_weight, int(pop.beam_ids[k]))
            for k in range(s.users.count) if modes[k] is not uc.ServiceMode.OUTAGE
        ]
        active_ids = [b.beam_id for b in beams if b.active]
        hop = None
        if len(active_ids) > n_active_cap >= 1:
            demand = [sum(1 for d in demands if d.beam_id == b) for b in active_ids]
            epoch = max(s.scheduler.hop_epoch_slots, math.ceil(len(active_ids) / n_active_cap))
            hop = sch.beam_hop_plan(active_ids, n_active_cap, epoch, demand)

        served, granted_sum, grants, cap_sum, bw_sum, bw_se_sum, beams_on = set(), 0.0, 0, 0.0, 0.0, 0.0, 0
        for k in range(slots_per_step):
            if hop is not None:
                lit = hop.illuminated(slot_counter)
                slot_beams = [b if b.beam_id in lit else dataclasses.replace(b, active=False) for b in beams]
            else:
                slot_beams = beams
            alloc = sch.schedule_slot(demands, slot_beams, policy, s.budget, state, ladder)
            alloc = sch.thermal_throttle(alloc, s.budget)
            problems = sch.audit_allocation(alloc, s.budget)
            if problems:
                raise RuntimeError(f"slot {slot_counter} at t={t}: {problems}")
            slot_counter += 1
            served |= alloc.served_users()
            granted_sum += alloc.total_granted_mbps
            grants += sum(1 for e in alloc.entries if e.granted_mbps > 0)
            cap_sum += math.fsum(alloc.beam_capacity_mbps.values())
            bw_sum += math.fsum(e.bandwidth_hz for e in alloc.entries)
            bw_se_sum += math.fsum(e.bandwidth_hz * e.spectral_efficiency_bps_hz for e in alloc.entries)
            beams_on += len(alloc.beam_power_w)
        row.update(active_beams=beams_on / slots_per_step,
                   users_served=len(served),
                   aggregate_mbps=granted_sum / slots_per_step,
                   beam_capacity_mbps=cap_sum / slots_per_step,
                   grants_per_slot=grants / slots_per_step,
                   spectral_eff_bps_hz=bw_se_sum / bw_sum if bw_sum > 0 else 0.0)

        # latency: user leg plus mesh path to the breakout point
        path, penalty = None, 0.0
        need_mesh = s.mesh.breakout == mesh.GATEWAY or len(s.mesh.core_sats) > 0
        if need_mesh:
            key = math.floor(t / s.mesh.update_s)
            if key != snapshot_key:
                _, _, snap_states = _constellation_states(s, key * s.mesh.update_s)
                snapshot = mesh.build_snapshot(snap_states, gateways, s.mesh.terminals_per_sat, s.mesh.max_link_km,
                                               s.mesh.link_capacity_gbps, s.elevation_mask_deg)
                snapshot_key = key
            if s.mesh.breakout == mesh.GATEWAY:
                targets = [mesh.gateway_node(g.site_id) for g in gateways]
                penalty = s.mesh.gateway_penalty_ms
            else:
                targets = [mesh.sat_node(c) for c in s.mesh.core_sats]
            routes = [mesh.route(snapshot, mesh.sat_node(serving), d, mesh.LATENCY, s.mesh.switch_latency_ms)
                      for d in targets]
            routes = [r for r in routes if r is not None]
            path = min(routes, key=lambda r: (r.total_latency_ms, r.nodes)) if routes else None
        reachable = path is not None or not need_mesh
        if reachable and served:
            legs = user_range[sorted(served)]
            rtts = [mesh.end_to_end_rtt_ms(float(d), path, s.mesh.breakout, penalty, s.mesh.switch_latency_ms)
                    for d in legs]
            row.update(mesh_hops=path.hop_count if path is not None else 0,
                       rtt_p50_ms=_pct(rtts, 50), rtt_p95_ms=_pct(rtts, 95),
                       orbital_fraction=1.0 if s.mesh.breakout == mesh.ORBITAL else 0.0)
        rows.append(row)

    summary = _summarise(s, rows, chain, events, beams, passes)
    return ScenarioReport(s.name, s.seed, rows, summary)


def _summarise(s: Scenario, rows, chain, events, beams, passes) -> dict:
    served_rows = [r for r in rows if r["serving_sat"] >= 0 and r["active_beams"] > 0]
    beams_per_sat = cap.max_active_beams(s.budget, s.beams.rf_power_w)
    if served_rows:
        per_beam = math.fsum(r["aggregate_mbps"] / r["active_beams"] for r in served_rows) / len(served_rows)
    else:
        per_beam = 0.0
    upb, per_sat_users, per_sat_gbps = cap.satellite_rollup(beams_per_sat, per_beam, s.users.per_user_mbps)
    rollup = cap.constellation_rollup(s.n_sats, per_sat_users, per_sat_gbps, per_beam, upb, beams_per_sat)

    stats = ho.handover_kpi(events, s.handover.kpi_target_ms)
    covered = ho.covered_seconds(chain, 0.0, s.duration_s)
    trace = ho.score_session(events, s.users.service_class, ho.GapThresholds(s.handover.voice_ms, s.handover.data_ms),
                             covered, s.duration_s, user_id=s.city.name)
    return {
        "scenario": s.name,
        "seed": s.seed,
        "schema_version": s.schema_version,
        "n_rows": len(rows),
        "duration_s": s.duration_s,
        "timestep_s": s.timestep_s,
        "slots_per_step": s.slots_per_step,
        "n_satellites": s.n_sats,
        "n_users": s.users.count,
        "per_user_request_mbps": s.users.per_user_mbps,
        "beams_per_satellite": beams_per_sat,
        "n_cells": len(beams),
        "totals": {
            "users_served": sum(r["users_served"] for r in rows),
            "aggregate_mbps": math.fsum(r["aggregate_mbps"] for r in rows),
            "beam_capacity_mbps": math.fsum(r["beam_capacity_mbps"] for r in rows),
        },
        "capacity": dataclasses.asdict(rollup),
        "handover": {
            "events": [dataclasses.asdict(e) for e in events],
            "stats": dataclasses.asdict(stats),
            "session": {"service_class": trace.service_class, "drops": trace.drops,
                        "served_fraction": trace.served_fraction},
            "n_passes": len(passes),
        },
    }


# --- emission and reload --------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(report: ScenarioReport, format: str = "csv", out_dir=".") -> list[Path]:
    """Write ``rows.csv`` + ``summary.json`` (csv) or a single ``report.json`` (json)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        meta = {"scenario_name": report.scenario_name, "seed": report.seed, "columns": list(ROW_COLUMNS)}
        if format == "csv":
            rows_path, summary_path = out / "rows.csv", out / "summary.json"
            with open(rows_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(ROW_COLUMNS)
                for r in report.rows:
                    w.writerow([_fmt(r[c]) for c in ROW_COLUMNS])
            summary_path.write_text(json.dumps({**meta, "summary": report.summary}, indent=2, sort_keys=True) + "\n")
            return [rows_path, summary_path]
        if format == "json":
            path = out / "report.json"
            path.write_text(json.dumps({**meta, "summary": report.summary, "rows": report.rows},
                                       indent=2, sort_keys=True) + "\n")
            return [path]
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    raise ValueError(f"unknown report format {format!r}")


def _parse_cell(col: str, text: str):
    if text == "":
        return None
    return int(text) if col in INT_COLUMNS else float(text)


def load_report(path) -> ScenarioReport:
    """Reload a report from ``report.json``, ``rows.csv``, ``summary.json`` or their directory."""
    p = Path(path)
    if p.is_dir():
        p = p / "report.json" if (p / "report.json").exists() else p / "rows.csv"
    if p.suffix == ".json":
        doc = json.loads(p.read_text())
        if "rows" in doc:
            return ScenarioReport(doc["scenario_name"], doc["seed"], doc["rows"], doc["summary"])
        p = p.with_name("rows.csv")
    doc = json.loads(p.with_name("summary.json").read_text())
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != ROW_COLUMNS:
            raise ValueError(f"{p}: unexpected CSV header")
        rows = [{c: _parse_cell(c, v) for c, v in zip(header, line)} for line in reader]
    return ScenarioReport(doc["scenario_name"], doc["seed"], rows, doc["summary"])


# --- KPIs -----------------------------------------------------------------

_OPS = {
    ">=": lambda m, t: m >= t,
    ">": lambda m, t: m > t,
    "<=": lambda m, t: m <= t,
    "<": lambda m, t: m < t,
}
KPI_NAMES = ("beams_per_sat", "users_per_beam", "per_user_mbps", "latency_ms",
             "spectral_efficiency", "handover_ms", "earth_independent_fraction")
HIGHER_IS_BETTER = frozenset({"beams_per_sat", "users_per_beam", "per_user_mbps",
                              "spectral_efficiency", "earth_independent_fraction"})


@dataclass(frozen=True)
class KpiTarget:
    value: float
    op: str

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class KpiTargets:
    era: str
    targets: dict

    def __getitem__(self, name) -> KpiTarget:
        return self.targets[name]


@dataclass(frozen=True)
class KpiVerdict:
    kpi: str
    measured: Optional[float]
    target: float
    op: str
    margin: Optional[float]
    passed: bool
    note: str = ""


def load_targets(path_or_era) -> KpiTargets:
    """Targets from a TOML file or a bundled era (``"2025"`` / ``"2040"``)."""
    p = Path(str(path_or_era))
    if not p.exists() and str(path_or_era) in ("2025", "2040"):
        text = _preset_path(f"targets_{path_or_era}").read_text()
    else:
        text = p.read_text()
    data = tomllib.loads(text)
    era = str(data.pop("era"))
    targets = {}
    for name in KPI_NAMES:
        if name not in data:
            raise ScenarioError(name, "missing KPI target")
        spec = data.pop(name)
        targets[name] = KpiTarget(float(spec["value"]), str(spec["op"]))
    if data:
        raise ScenarioError(sorted(data)[0], "unknown KPI")
    return KpiTargets(era, targets)


def measure_kpis(report: ScenarioReport) -> dict:
    """KPI measurements derived from report rows and the handover summary."""
    rows = [r for r in report.rows if r["serving_sat"] >= 0 and r["active_beams"] and r["grants_per_slot"]]
    if not rows:
        return dict.fromkeys(KPI_NAMES)
    rtt = [r["rtt_p95_ms"] for r in rows if r["rtt_p95_ms"] is not None]
    hand = report.summary.get("handover", {}).get("stats", {})
    return {
        "beams_per_sat": float(report.summary["beams_per_satellite"]),
        "users_per_beam": math.fsum(r["users_served"] / r["active_beams"] for r in rows) / len(rows),
        "per_user_mbps": math.fsum(r["aggregate_mbps"] for r in rows) / math.fsum(r["grants_per_slot"] for r in rows),
        "latency_ms": max(rtt) if rtt else None,
        "spectral_efficiency": math.fsum(r["spectral_eff_bps_hz"] for r in rows) / len(rows),
        "handover_ms": float(hand["max_gap_ms"]) if hand else None,
        "earth_independent_fraction": math.fsum(r["orbital_fraction"] for r in rows) / len(rows),
    }


def kpi_check(report: ScenarioReport, targets: KpiTargets) -> list[KpiVerdict]:
    measured = measure_kpis(report) if report.rows else dict.fromkeys(KPI_NAMES)
    verdicts = []
    for name in KPI_NAMES:
        t = targets[name]
        m = measured.get(name)
        if m is None:
            verdicts.append(KpiVerdict(name, None, t.value, t.op, None, False, "no data"))
            continue
        margin = m - t.value if name in HIGHER_IS_BETTER else t.value - m
        verdicts.append(KpiVerdict(name, m, t.value, t.op, margin, _OPS[t.op](m, t.value)))
    return verdicts


def format_verdicts(verdicts, era: str = "") -> str:
    lines = [f"KPI check{f' vs {era} targets' if era else ''}"]
    for v in verdicts:
        status = "PASS" if v.passed else "FAIL"
        measured = "no data" if v.measured is None else f"{v.measured:.4g}"
        lines.append(f"  [{status}] {v.kpi:<28} measured {measured:>10}  target {v.op} {v.target:g}")
    return "\n".join(lines)
