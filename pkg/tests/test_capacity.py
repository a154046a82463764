import math

import pytest
from hypothesis import given, settings, strategies as st

from orbitel import capacity as cap

LADDER = cap.default_mcs_ladder()


@pytest.mark.parametrize("snr,se", [(7.0, 4.0), (-1.0, 0.0), (20.0, 6.0), (6.99, 2.0), (15.0, 6.0),
                                    (0.0, 1.0), (1e6, 8.0)])
def test_ladder_lookup(snr, se):
    assert LADDER.lookup(snr) == se


def test_select_mcs_entries():
    assert cap.select_mcs(6.99, LADDER).modulation == "QPSK"
    assert cap.select_mcs(15.0, LADDER).modulation == "64-QAM"
    assert cap.select_mcs(1e9, LADDER).modulation == "256-QAM"
    assert cap.select_mcs(-0.01, LADDER) is None


def test_ladder_validation_and_truncation():
    with pytest.raises(ValueError):
        cap.McsLadder(())
    with pytest.raises(ValueError):
        cap.McsLadder((cap.McsEntry(5, "a", 1.0), cap.McsEntry(5, "b", 2.0)))
    with pytest.raises(ValueError):
        cap.McsLadder((cap.McsEntry(0, "a", 2.0), cap.McsEntry(5, "b", 1.0)))
    short = LADDER.truncated("16-QAM")
    assert len(short) == 3 and short.lookup(40.0) == 4.0
    assert short.floor_db == 0.0


def test_beam_throughput():
    assert cap.beam_throughput_mbps(100e6, 4.0, 0.0) == pytest.approx(400.0)
    assert cap.beam_throughput_mbps(100e6, 4.0, 0.20) == pytest.approx(320.0)
    assert cap.beam_throughput_mbps(100e6, 4.0, 1 - 1e-12) == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(ValueError):
        cap.beam_throughput_mbps(100e6, 4.0, 1.0)


def test_users_per_beam():
    assert cap.users_per_beam(400, 10) == 40
    assert cap.users_per_beam(320, 10) == 32
    assert cap.users_per_beam(5, 10) == 0
    # floating noise just under an integer still floors to it
    assert cap.users_per_beam(0.1 * 3 * 100, 10) == 3
    with pytest.raises(ValueError):
        cap.users_per_beam(400, 0)


@pytest.mark.parametrize("overhead", [0.15, 0.20, 0.25])
def test_overhead_users_in_quoted_range(overhead):
    assert 30 <= cap.users_per_beam(cap.beam_throughput_mbps(100e6, 4.0, overhead), 10) <= 35


def test_max_active_beams():
    big_radiator = dict(radiator_area_m2=1e6)
    assert cap.max_active_beams(cap.SatelliteBudget(500, 20_000, 0.3, **big_radiator), 10) == 500
    assert cap.max_active_beams(cap.SatelliteBudget(500, 20_000, 0.3, **big_radiator), 20) == 300
    assert cap.max_active_beams(cap.SatelliteBudget(700, 20_000, 0.3, **big_radiator), 10) == 600
    assert cap.max_active_beams(cap.SatelliteBudget(500, 20_000, 1.0, **big_radiator), 10) == 500
    # radiator binding: 15 kW rejection / (10 W x (1/0.3 - 1)) = 642.86
    assert cap.max_active_beams(cap.SatelliteBudget(2000, 1e6, 0.3), 10) == 642
    with pytest.raises(ValueError):
        cap.max_active_beams(cap.SatelliteBudget(), 0.0)


def test_budget_validation():
    with pytest.raises(ValueError):
        cap.SatelliteBudget(pa_efficiency_frac=0.0)
    with pytest.raises(ValueError):
        cap.SatelliteBudget(n_beams_max=0)
    with pytest.raises(ValueError):
        cap.SatelliteBudget(radiator_area_m2=0.0)


def test_reuse():
    assert cap.apply_reuse(300e6, 3) == pytest.approx(100e6)
    assert cap.apply_reuse(300e6, 1) == 300e6
    assert [cap.apply_reuse(1e8, k) for k in (1, 2, 3, 4, 7)] == sorted(
        [cap.apply_reuse(1e8, k) for k in (1, 2, 3, 4, 7)], reverse=True)
    with pytest.raises(ValueError):
        cap.apply_reuse(1e8, 0)


def test_rollups():
    upb, users, gbps = cap.satellite_rollup(500, 400.0, 10.0)
    assert (upb, users, gbps) == (40, 20_000, 200.0)
    assert cap.satellite_rollup(500, 500.0, 10.0)[1] == 25_000
    assert cap.satellite_rollup(500, 300.0, 10.0)[2] == pytest.approx(150.0)
    r = cap.constellation_rollup(600, 20_000, 200.0)
    assert r.constellation_users == 12_000_000
    assert r.constellation_gbps == pytest.approx(120_000.0)
    zero = cap.constellation_rollup(0, 20_000, 200.0)
    assert zero.constellation_users == 0 and zero.constellation_gbps == 0.0
    with pytest.raises(ValueError):
        cap.constellation_rollup(-1, 0, 0.0)


def test_city_coverage():
    r = cap.constellation_rollup(600, 15_000, 150.0)
    assert cap.city_coverage_check(r, 100.0).passed
    v = cap.city_coverage_check(r, 200.0)
    assert not v.passed and v.shortfall_gbps == pytest.approx(50.0)
    assert cap.city_coverage_check(r, 0.0).passed
    assert cap.city_coverage_check(r, 200.0, sats_over_city=2).passed
    empty = cap.constellation_rollup(0, 15_000, 150.0)
    assert not cap.city_coverage_check(empty, 1.0).passed


def test_beam_config_validation():
    with pytest.raises(ValueError):
        cap.BeamConfig(bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        cap.BeamConfig(scheduler_overhead_frac=1.0)


@settings(max_examples=200)
@given(snr=st.floats(-50, 60), delta=st.floats(0, 30))
def test_lookup_is_monotone(snr, delta):
    assert LADDER.lookup(snr + delta) >= LADDER.lookup(snr)


@settings(max_examples=200)
@given(dc=st.floats(100, 1e5), eta=st.floats(0.05, 1.0), area=st.floats(1, 1e3), p=st.floats(0.5, 100),
       nmax=st.integers(1, 5000))
def test_max_active_beams_respects_every_limit(dc, eta, area, p, nmax):
    b = cap.SatelliteBudget(nmax, dc, eta, area)
    n = cap.max_active_beams(b, p)
    assert 0 <= n <= nmax
    assert n * p <= b.rf_power_w * (1 + 1e-9)
    assert n * b.waste_heat_w(p) <= b.heat_rejection_w * (1 + 1e-9)
    # one more beam would break a limit
    assert (n + 1 > nmax or (n + 1) * p > b.rf_power_w * (1 + 1e-9)
            or (n + 1) * b.waste_heat_w(p) > b.heat_rejection_w * (1 + 1e-9))
