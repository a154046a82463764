"""Feasibility models for a direct-to-device orbital mobile network."""
from .capacity import (BeamConfig, CapacityRollup, McsEntry, McsLadder, SatelliteBudget, beam_throughput_mbps,
                       constellation_rollup, default_mcs_ladder, max_active_beams, select_mcs, users_per_beam)
from .geometry import (ConstellationShell, GroundSite, PassWindow, SatelliteState, doppler_hz, elevation_deg,
                       pass_windows, propagate, slant_range_km)
from .handover import HandoverEvent, plan_handovers, score_session
from .link_budget import LinkBudgetInput, LinkBudgetResult, fspl_db, noise_power_dbm, snr_paper_mode, snr_physical_mode
from .mesh import MeshSnapshot, RoutePath, build_snapshot, end_to_end_rtt_ms, route
from .scenario import Scenario, ScenarioReport, emit_report, kpi_check, load_report, load_scenario, load_targets, run
from .scheduler import Allocation, Policy, UserDemand, audit_allocation, beam_hop_plan, schedule_slot
from .urban_channel import EnvironmentClass, ServiceMode, default_environment_table, service_mode

__version__ = "0.1.0"
