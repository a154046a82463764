"""Command-line entry point: ``orbitel <subcommand>``.

Exit codes: 0 success, 1 validation error, 2 KPI failure (``kpi-check``).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import capacity as cap
from . import link_budget as lb
from . import mesh
from . import scenario as sc

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_KPI_FAIL = 2


def _cmd_linkbudget(args) -> int:
    if args.path_loss is None and args.distance_km is None:
        raise ValueError("give --path-loss or --distance-km")
    path_loss = args.path_loss if args.path_loss is not None else lb.fspl_db(args.distance_km, args.freq_ghz)
    inp = lb.LinkBudgetInput(
        eirp_dbw=args.eirp, path_loss_db=path_loss, excess_loss_db=args.excess_loss,
        rx_gain_over_temp_db_per_k=args.gt, noise_temp_k=args.temp, bandwidth_hz=args.bandwidth,
        impl_margin_db=args.margin, rx_gain_dbi=args.rx_gain,
    )
    if args.mode == lb.PAPER:
        gain = args.array_gain if args.elements is None else lb.array_gain_db(args.elements)
        res = lb.snr_paper_mode(inp, gain, args.noise_db)
    else:
        res = lb.snr_physical_mode(inp)
    if args.format == "json":
        print(json.dumps({"mode": res.mode, "snr_db": res.snr_db, "components": res.components}, indent=2))
    else:
        print(f"link budget ({res.mode} mode)")
        for line in res.ledger_lines():
            print(f"  {line}")
        entry = cap.select_mcs(res.snr_db, cap.default_mcs_ladder())
        print(f"  MCS: {entry.modulation if entry else 'none'}")
    return EXIT_OK


def _cmd_capacity(args) -> int:
    bw = cap.apply_reuse(args.bandwidth_mhz * 1e6, args.reuse)
    se = args.se if args.se is not None else cap.default_mcs_ladder().lookup(args.snr)
    per_beam = cap.beam_throughput_mbps(bw, se, args.overhead)
    budget = cap.SatelliteBudget(args.beams, args.dc_power, args.efficiency, args.radiator_area)
    n_beams = cap.max_active_beams(budget, args.rf_per_beam)
    upb, sat_users, sat_gbps = cap.satellite_rollup(n_beams, per_beam, args.per_user_mbps)
    rollup = cap.constellation_rollup(args.sats, sat_users, sat_gbps, per_beam, upb, n_beams)
    out = dataclasses.asdict(rollup)
    out["spectral_efficiency_bps_hz"] = se
    if args.required_gbps is not None:
        verdict = cap.city_coverage_check(rollup, args.required_gbps, args.sats_over_city)
        out["coverage"] = dataclasses.asdict(verdict)
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        for k, v in out.items():
            print(f"{k:>28}: {v}")
    return EXIT_OK


def _cmd_route(args) -> int:
    scenario = sc.load_scenario(args.scenario)
    _, _, states = sc._constellation_states(scenario, args.time)
    snap = mesh.build_snapshot(states, scenario.mesh.gateways, scenario.mesh.terminals_per_sat,
                               scenario.mesh.max_link_km, scenario.mesh.link_capacity_gbps,
                               scenario.elevation_mask_deg)
    src = args.src if not args.src.isdigit() else mesh.sat_node(int(args.src))
    dst = args.dst if not args.dst.isdigit() else mesh.sat_node(int(args.dst))
    path = mesh.route(snap, src, dst, args.metric, scenario.mesh.switch_latency_ms)
    if path is None:
        print(f"no route from {src} to {dst}")
        return EXIT_INVALID
    rtt = mesh.end_to_end_rtt_ms(args.user_leg_km, path, mesh.ORBITAL, 0.0, scenario.mesh.switch_latency_ms)
    out = {"nodes": list(path.nodes), "hops": path.hop_count, "distance_km": path.total_distance_km,
           "one_way_latency_ms": path.total_latency_ms, "rtt_ms": rtt}
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        print(" -> ".join(path.nodes))
        for k in ("hops", "distance_km", "one_way_latency_ms", "rtt_ms"):
            print(f"{k:>20}: {out[k]}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scenario = sc.load_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    report = sc.run(scenario)
    paths = sc.emit_report(report, args.format, args.out)
    for p in paths:
        print(p)
    return EXIT_OK


def _cmd_kpi_check(args) -> int:
    report = sc.load_report(args.report)
    targets = sc.load_targets(args.targets)
    verdicts = sc.kpi_check(report, targets)
    if args.format == "json":
        print(json.dumps([dataclasses.asdict(v) for v in verdicts], indent=2))
    else:
        print(sc.format_verdicts(verdicts, targets.era))
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_KPI_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbitel", description="Orbital mobile network calculators and simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="report format for simulate; csv prints plain text elsewhere")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=".")

    lbp = sub.add_parser("linkbudget", help="itemised downlink SNR")
    common(lbp)
    lbp.add_argument("--mode", choices=(lb.PHYSICAL, lb.PAPER), default=lb.PHYSICAL)
    lbp.add_argument("--eirp", type=float, default=60.0, help="EIRP per beam, dBW")
    lbp.add_argument("--gt", type=float, default=-17.0, help="receiver G/T, dB/K (paper mode)")
    lbp.add_argument("--path-loss", type=float, default=None, help="path loss, dB")
    lbp.add_argument("--distance-km", type=float, default=None)
    lbp.add_argument("--freq-ghz", type=float, default=2.0)
    lbp.add_argument("--excess-loss", type=float, default=0.0)
    lbp.add_argument("--temp", type=float, default=lb.DEFAULT_NOISE_TEMP_K)
    lbp.add_argument("--bandwidth", type=float, default=1e6, help="noise bandwidth, Hz")
    lbp.add_argument("--margin", type=float, default=lb.DEFAULT_MARGIN_DB)
    lbp.add_argument("--rx-gain", type=float, default=lb.DEFAULT_HANDSET_GAIN_DBI)
    lbp.add_argument("--array-gain", type=float, default=0.0)
    lbp.add_argument("--elements", type=int, default=None, help="array elements (overrides --array-gain)")
    lbp.add_argument("--noise-db", type=float, default=None, help="quoted noise figure (paper mode)")
    lbp.set_defaults(func=_cmd_linkbudget)

    cp = sub.add_parser("capacity", help="beam, satellite and constellation roll-up")
    common(cp)
    cp.add_argument("--bandwidth-mhz", type=float, default=100.0)
    cp.add_argument("--reuse", type=int, default=1)
    cp.add_argument("--snr", type=float, default=7.0)
    cp.add_argument("--se", type=float, default=None, help="spectral efficiency (overrides --snr)")
    cp.add_argument("--overhead", type=float, default=0.0)
    cp.add_argument("--per-user-mbps", type=float, default=10.0)
    cp.add_argument("--beams", type=int, default=500, help="beam-count limit")
    cp.add_argument("--rf-per-beam", type=float, default=10.0)
    cp.add_argument("--dc-power", type=float, default=20_000.0)
    cp.add_argument("--efficiency", type=float, default=0.3)
    cp.add_argument("--radiator-area", type=float, default=150.0)
    cp.add_argument("--sats", type=int, default=600)
    cp.add_argument("--required-gbps", type=float, default=None)
    cp.add_argument("--sats-over-city", type=int, default=1)
    cp.set_defaults(func=_cmd_capacity)

    rp = sub.add_parser("route", help="mesh route between two nodes of a scenario's constellation")
    common(rp)
    rp.add_argument("--scenario", default="walker_600")
    rp.add_argument("--src", required=True, help="satellite index or node id")
    rp.add_argument("--dst", required=True)
    rp.add_argument("--time", type=float, default=0.0)
    rp.add_argument("--metric", choices=(mesh.LATENCY, mesh.HOPS), default=mesh.LATENCY)
    rp.add_argument("--user-leg-km", type=float, default=550.0)
    rp.set_defaults(func=_cmd_route)

    sp = sub.add_parser("simulate", help="run a scenario file or preset")
    common(sp)
    sp.add_argument("scenario")
    sp.set_defaults(func=_cmd_simulate)

    kp = sub.add_parser("kpi-check", help="compare a report with KPI targets")
    common(kp)
    kp.add_argument("report", help="report directory or file")
    kp.add_argument("targets", help="targets file or era (2025, 2040)")
    kp.set_defaults(func=_cmd_kpi_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
