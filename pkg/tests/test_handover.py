import pytest
from hypothesis import given, settings, strategies as st

from orbitel import handover as ho
from orbitel.geometry import PassWindow


def test_overlapping_make_before_break_has_no_gap():
    passes = [PassWindow(1, 0.0, 300.0, 60.0), PassWindow(2, 250.0, 550.0, 70.0)]
    events = ho.plan_handovers(passes, ho.MAKE_BEFORE_BREAK)
    assert [(e.from_sat, e.to_sat, e.gap_ms, e.time_s) for e in events] == [(1, 2, 0.0, 300.0)]


def test_break_before_make_pays_base_gap():
    passes = [PassWindow(1, 0.0, 300.0, 60.0), PassWindow(2, 250.0, 550.0, 70.0)]
    assert ho.plan_handovers(passes, ho.BREAK_BEFORE_MAKE, base_gap_ms=80.0)[0].gap_ms == 80.0


def test_coverage_hole_adds_to_gap():
    passes = [PassWindow(1, 0.0, 300.0, 60.0), PassWindow(2, 300.5, 600.0, 70.0)]
    for policy in (ho.MAKE_BEFORE_BREAK, ho.BREAK_BEFORE_MAKE):
        assert ho.plan_handovers(passes, policy, 50.0)[0].gap_ms == pytest.approx(550.0)


def test_policy_validation():
    with pytest.raises(ValueError):
        ho.plan_handovers([], "teleport")
    with pytest.raises(ValueError):
        ho.HandoverEvent(0.0, 1, 2, -1.0)
    with pytest.raises(ValueError):
        ho.GapThresholds(0.0, 200.0)


@pytest.mark.parametrize("gap,voice_drop,data_drop", [
    (0.0, 0, 0), (50.0, 0, 0), (50.001, 1, 0), (200.0, 1, 0), (200.001, 1, 1)])
def test_drop_counting_uses_class_thresholds(gap, voice_drop, data_drop):
    events = [ho.HandoverEvent(10.0, 1, 2, gap)]
    assert ho.score_session(events, "voice").drops == voice_drop
    assert ho.score_session(events, "data").drops == data_drop


def test_unknown_service_class():
    with pytest.raises(ValueError):
        ho.score_session([], "video")


def test_served_fraction():
    t = ho.score_session([], "data", covered_s=450.0, total_s=600.0)
    assert t.served_fraction == pytest.approx(0.75)
    assert ho.score_session([], "data").served_fraction == 1.0


def test_serving_sequence_holds_until_set():
    passes = [PassWindow(1, 0.0, 300.0, 60.0), PassWindow(2, 100.0, 350.0, 40.0),
              PassWindow(3, 200.0, 500.0, 50.0), PassWindow(4, 600.0, 700.0, 30.0)]
    chain = ho.serving_sequence(passes)
    assert [p.sat_id for p in chain] == [1, 3, 4]
    events = ho.plan_handovers(chain)
    assert [e.gap_ms for e in events] == [0.0, pytest.approx(100_050.0)]


def test_covered_seconds_merges_overlaps():
    passes = [PassWindow(1, 0.0, 100.0, 30), PassWindow(2, 50.0, 150.0, 30), PassWindow(3, 200.0, 260.0, 30)]
    assert ho.covered_seconds(passes, 0.0, 1000.0) == pytest.approx(210.0)
    assert ho.covered_seconds(passes, 120.0, 220.0) == pytest.approx(50.0)


def test_handover_kpi():
    stats = ho.handover_kpi([ho.HandoverEvent(0, 1, 2, 0.0), ho.HandoverEvent(1, 2, 3, 99.0)])
    assert stats.passed and stats.max_gap_ms == 99.0 and stats.count == 2
    assert not ho.handover_kpi([ho.HandoverEvent(0, 1, 2, 100.0)]).passed
    assert ho.handover_kpi([]).passed


windows = st.lists(st.tuples(st.floats(0, 5000), st.floats(10, 600)), min_size=1, max_size=15)


@settings(max_examples=200)
@given(spec=windows)
def test_chain_properties(spec):
    passes = [PassWindow(i, r, r + d, 40.0) for i, (r, d) in enumerate(spec)]
    chain = ho.serving_sequence(passes)
    sets = [p.set_s for p in chain]
    assert sets == sorted(sets) and len(set(sets)) == len(sets)
    assert chain[-1].set_s == max(p.set_s for p in passes)
    events = ho.plan_handovers(chain, ho.MAKE_BEFORE_BREAK)
    for e, (a, b) in zip(events, zip(chain, chain[1:])):
        assert (e.gap_ms == 0.0) == (b.rise_s <= a.set_s)
