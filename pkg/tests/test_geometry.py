import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitel import geometry as geo
from orbitel.constants import EARTH_MU_KM3_S2, EARTH_RADIUS_KM, SPEED_OF_LIGHT_KM_S

SHELL = geo.ConstellationShell(550.0, 53.0, 12, 50, 0.6)
EQUATOR = geo.GroundSite("eq", 0.0, 0.0)


def _sat_above(lat_deg, lon_deg, altitude_km=550.0, velocity=(0.0, 0.0, 0.0)):
    """Satellite placed over a sub-satellite point at t = 0."""
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    r = EARTH_RADIUS_KM + altitude_km
    pos = r * np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])
    return geo.SatelliteState(0, pos, np.array(velocity, dtype=float), 0.0)


def _elevation_oracle(central_angle_deg, altitude_km=550.0):
    # spherical-trig elevation for a satellite at central angle gamma from the site
    g = math.radians(central_angle_deg)
    ratio = EARTH_RADIUS_KM / (EARTH_RADIUS_KM + altitude_km)
    return math.degrees(math.atan2(math.cos(g) - ratio, math.sin(g)))


def test_period_and_speed_match_two_body():
    a = EARTH_RADIUS_KM + 550.0
    assert SHELL.period_s == pytest.approx(2 * math.pi * math.sqrt(a**3 / EARTH_MU_KM3_S2), rel=1e-12)
    assert SHELL.period_s == pytest.approx(5730.0, abs=1.0)
    _, vel = geo.shell_states(SHELL, 123.0)
    assert np.allclose(np.linalg.norm(vel, axis=-1), math.sqrt(EARTH_MU_KM3_S2 / a))


def test_velocity_is_derivative_of_position():
    h = 1e-3
    p0, v0 = geo.shell_states(SHELL, 100.0)
    p1, _ = geo.shell_states(SHELL, 100.0 + h)
    pm, _ = geo.shell_states(SHELL, 100.0 - h)
    assert np.allclose((p1 - pm) / (2 * h), v0, atol=1e-6)


def test_walker_planes_have_expected_raan_and_inclination():
    pos, vel = geo.shell_states(SHELL, 0.0)
    h = np.cross(pos, vel)
    inc = np.degrees(np.arccos(h[:, 2] / np.linalg.norm(h, axis=-1)))
    raan = np.degrees(np.arctan2(h[:, 0], -h[:, 1])) % 360
    assert np.allclose(inc, 53.0)
    planes = np.arange(SHELL.n_sats) // SHELL.sats_per_plane
    expected = (360.0 * planes / SHELL.n_planes) % 360
    diff = (raan - expected + 180) % 360 - 180
    assert np.allclose(diff, 0.0, atol=1e-9)


def test_walker_in_plane_spacing_and_phasing():
    pos, _ = geo.shell_states(SHELL, 0.0)
    r = np.linalg.norm(pos, axis=-1)
    cos_sep = np.sum(pos[0] * pos[1]) / (r[0] * r[1])
    assert math.degrees(math.acos(cos_sep)) == pytest.approx(360.0 / 50, abs=1e-9)


def test_propagate_matches_vectorised_states():
    s = geo.propagate(SHELL, 137, 42.0)
    pos, vel = geo.shell_states(SHELL, 42.0)
    assert np.allclose(s.position, pos[137]) and np.allclose(s.velocity, vel[137])
    assert (s.plane, s.slot) == (2, 37)
    with pytest.raises(IndexError):
        geo.propagate(SHELL, SHELL.n_sats, 0.0)


def test_shell_validation():
    with pytest.raises(ValueError):
        geo.ConstellationShell(-1.0, 53.0)
    with pytest.raises(ValueError):
        geo.ConstellationShell(550.0, 190.0)
    with pytest.raises(ValueError):
        geo.ConstellationShell(550.0, 53.0, 0, 1)


def test_ground_site_validation():
    with pytest.raises(ValueError):
        geo.GroundSite("x", 91.0, 0.0)
    with pytest.raises(ValueError):
        geo.GroundSite("x", 0.0, 200.0)


def test_zenith_geometry():
    sat = _sat_above(0.0, 0.0)
    assert geo.elevation_deg(sat, EQUATOR) == pytest.approx(90.0)
    assert geo.slant_range_km(sat, EQUATOR) == pytest.approx(550.0)


@pytest.mark.parametrize("gamma", [0.5, 2.0, 5.0, 8.0, 12.0, 18.0])
def test_elevation_matches_spherical_trig(gamma):
    sat = _sat_above(0.0, gamma)
    assert geo.elevation_deg(sat, EQUATOR) == pytest.approx(_elevation_oracle(gamma), abs=1e-9)


def test_horizon_slant_range():
    # el = 0 where cos(gamma) = Re / r; the range is sqrt(r^2 - Re^2) = 2703.8 km
    r = EARTH_RADIUS_KM + 550.0
    gamma = math.degrees(math.acos(EARTH_RADIUS_KM / r))
    sat = _sat_above(0.0, gamma)
    assert geo.elevation_deg(sat, EQUATOR) == pytest.approx(0.0, abs=1e-9)
    assert geo.slant_range_km(sat, EQUATOR) == pytest.approx(2703.8, abs=0.05)


def test_site_rotates_with_earth():
    p0 = geo.site_position_km(EQUATOR, 0.0)
    p1 = geo.site_position_km(EQUATOR, 86164.0905)
    assert np.allclose(p0, p1, atol=1e-3)
    v = geo.site_velocity_km_s(EQUATOR, 0.0)
    assert np.linalg.norm(v) == pytest.approx(EARTH_RADIUS_KM * 7.2921159e-5)


def test_doppler_zero_at_zenith():
    # horizontal velocity overhead, with the site velocity added so the
    # relative motion is purely transverse
    site_v = geo.site_velocity_km_s(EQUATOR, 0.0)
    sat = _sat_above(0.0, 0.0, velocity=site_v + np.array([0.0, 0.0, 7.5]))
    assert geo.doppler_hz(sat, EQUATOR, 2e9) == pytest.approx(0.0, abs=1e-6)


def test_doppler_kinematic_maximum():
    shift = geo.doppler_shift_hz(7.5, 2e9)
    assert shift == pytest.approx(7.5 / SPEED_OF_LIGHT_KM_S * 2e9)
    assert shift == pytest.approx(50e3, rel=0.01)
    assert geo.doppler_shift_hz(-7.5, 2e9) == -shift


def test_doppler_sign_over_a_pass():
    passes = geo.pass_windows(SHELL, EQUATOR, 25.0, 0.0, 6000.0)
    w = max(passes, key=lambda p: p.duration_s)
    early = geo.propagate(SHELL, w.sat_id, w.rise_s + 5)
    late = geo.propagate(SHELL, w.sat_id, w.set_s - 5)
    assert geo.doppler_hz(early, EQUATOR, 2e9) > 0 > geo.doppler_hz(late, EQUATOR, 2e9)
    assert abs(geo.doppler_hz(early, EQUATOR, 2e9)) < geo.doppler_shift_hz(SHELL.speed_km_s, 2e9)


def test_doppler_rejects_bad_carrier():
    with pytest.raises(ValueError):
        geo.doppler_hz(_sat_above(0, 0), EQUATOR, 0.0)


def test_pass_edges_sit_on_the_mask():
    passes = geo.pass_windows(SHELL, EQUATOR, 25.0, 0.0, 7200.0)
    assert passes
    for w in passes:
        for t in (w.rise_s, w.set_s):
            if 0.0 < t < 7200.0:
                el = geo.elevation_deg(geo.propagate(SHELL, w.sat_id, t), EQUATOR)
                assert el == pytest.approx(25.0, abs=1e-3)
        assert w.max_elevation_deg >= 25.0
    keys = [(w.rise_s, w.sat_id) for w in passes]
    assert keys == sorted(keys)


def test_pass_edges_converge_under_step_refinement():
    coarse = geo.pass_windows(SHELL, EQUATOR, 25.0, 0.0, 3600.0, step_s=10.0)
    fine = geo.pass_windows(SHELL, EQUATOR, 25.0, 0.0, 3600.0, step_s=1.0)
    assert [w.sat_id for w in coarse] == [w.sat_id for w in fine]
    for a, b in zip(coarse, fine):
        assert a.rise_s == pytest.approx(b.rise_s, abs=0.1)
        assert a.set_s == pytest.approx(b.set_s, abs=0.1)


def test_longest_pass_in_documented_bracket():
    # quoted durations span 3 to 7 minutes; only the union bracket is checked
    site = geo.GroundSite("sp", -23.55, -46.63)
    passes = geo.pass_windows(SHELL, site, 25.0, 0.0, 86400.0, step_s=20.0)
    full = [w for w in passes if 0.0 < w.rise_s and w.set_s < 86400.0]
    longest = max(w.duration_s for w in full)
    assert 180.0 <= longest <= 420.0


def test_pass_windows_validation():
    with pytest.raises(ValueError):
        geo.pass_windows(SHELL, EQUATOR, 25.0, 10.0, 0.0)
    with pytest.raises(ValueError):
        geo.pass_windows(SHELL, EQUATOR, 25.0, 0.0, 10.0, step_s=0.0)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0, 86400), lat=st.floats(-80, 80), lon=st.floats(-179, 179))
def test_elevation_and_range_bounds(t, lat, lon):
    site = geo.GroundSite("h", lat, lon)
    pos, _ = geo.shell_states(SHELL, t, range(0, 600, 37))
    el = geo._elevation_from_vectors(pos, geo.site_position_km(site, t)[None, :])
    rng = np.linalg.norm(pos - geo.site_position_km(site, t), axis=-1)
    assert np.all((el >= -90) & (el <= 90))
    assert np.all(rng >= 550.0 - 1e-6)
    # above the horizon the range cannot exceed the horizon range
    assert np.all(rng[el >= 0] <= 2703.8 + 0.1)
