"""Handover planning from pass windows and session-continuity scoring."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import PassWindow

MAKE_BEFORE_BREAK = "make_before_break"
BREAK_BEFORE_MAKE = "break_before_make"

DEFAULT_BASE_GAP_MS = 50.0
DEFAULT_CONTEXT_BYTES = 64 * 1024
HANDOVER_KPI_TARGET_MS = 100.0


@dataclass(frozen=True)
class HandoverEvent:
    time_s: float
    from_sat: int
    to_sat: int
    gap_ms: float
    context_bytes: int = DEFAULT_CONTEXT_BYTES

    def __post_init__(self):
        if self.gap_ms < 0:
            raise ValueError("gap_ms must be >= 0")


@dataclass(frozen=True)
class GapThresholds:
    voice_ms: float = 50.0
    data_ms: float = 200.0

    def __post_init__(self):
        if not (self.voice_ms > 0 and self.data_ms > 0):
            raise ValueError("gap thresholds must be positive")

    def for_class(self, service_class: str) -> float:
        if service_class == "voice":
            return self.voice_ms
        if service_class == "data":
            return self.data_ms
        raise ValueError(f"unknown service class {service_class!r}")


@dataclass(frozen=True)
class SessionTrace:
    user_id: str
    service_class: str
    events: tuple
    drops: int
    served_fraction: float


@dataclass(frozen=True)
class HandoverStats:
    count: int
    max_gap_ms: float
    mean_gap_ms: float
    p95_gap_ms: float
    target_ms: float
    passed: bool


def serving_sequence(passes: Sequence[PassWindow]) -> list[PassWindow]:
    """Chain of serving passes: hold each satellite until it sets, then move to
    the visible pass that lasts longest (or the next one to rise)."""
    remaining = sorted(passes, key=lambda p: (p.rise_s, p.sat_id))
    if not remaining:
        return []
    chain = [min(remaining, key=lambda p: (p.rise_s, -p.set_s, p.sat_id))]
    while True:
        cur = chain[-1]
        later = [p for p in remaining if p.set_s > cur.set_s]
        if not later:
            return chain
        overlapping = [p for p in later if p.rise_s <= cur.set_s]
        if overlapping:
            nxt = max(overlapping, key=lambda p: (p.set_s, -p.sat_id))
        else:
            nxt = min(later, key=lambda p: (p.rise_s, -p.set_s, p.sat_id))
        chain.append(nxt)


def plan_handovers(
    passes: Sequence[PassWindow],
    overlap_policy: str = MAKE_BEFORE_BREAK,
    base_gap_ms: float = DEFAULT_BASE_GAP_MS,
    context_bytes: int = DEFAULT_CONTEXT_BYTES,
) -> list[HandoverEvent]:
    """One event per consecutive pair of serving passes.

    Overlapping windows under make-before-break hand over without a gap;
    otherwise the gap is any coverage hole plus ``base_gap_ms``.
    """
    if overlap_policy not in (MAKE_BEFORE_BREAK, BREAK_BEFORE_MAKE):
        raise ValueError(f"unknown overlap policy {overlap_policy!r}")
    events = []
    for a, b in zip(passes, passes[1:]):
        hole_s = max(0.0, b.rise_s - a.set_s)
        if overlap_policy == MAKE_BEFORE_BREAK and hole_s == 0.0:
            gap = 0.0
        else:
            gap = hole_s * 1e3 + base_gap_ms
        events.append(HandoverEvent(a.set_s, a.sat_id, b.sat_id, gap, context_bytes))
    return events


def covered_seconds(passes: Sequence[PassWindow], t0: float, t1: float) -> float:
    """Length of the union of pass windows clipped to ``[t0, t1]``."""
    total, cur_lo, cur_hi = 0.0, None, None
    for p in sorted(passes, key=lambda p: p.rise_s):
        lo, hi = max(p.rise_s, t0), min(p.set_s, t1)
        if hi <= lo:
            continue
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def score_session(
    events: Sequence[HandoverEvent],
    service_class: str = "data",
    thresholds: GapThresholds = GapThresholds(),
    covered_s: Optional[float] = None,
    total_s: Optional[float] = None,
    user_id: str = "user",
) -> SessionTrace:
    """Count drops (gaps strictly above the class threshold) and coverage."""
    limit = thresholds.for_class(service_class)
    events = tuple(sorted(events, key=lambda e: e.time_s))
    drops = sum(1 for e in events if e.gap_ms > limit)
    if total_s is None or total_s <= 0:
        served = 1.0
    else:
        served = min(1.0, max(0.0, (covered_s if covered_s is not None else total_s) / total_s))
    return SessionTrace(user_id, service_class, events, drops, served)


def handover_kpi(events: Sequence[HandoverEvent], target_ms: float = HANDOVER_KPI_TARGET_MS) -> HandoverStats:
    if not events:
        return HandoverStats(0, 0.0, 0.0, 0.0, target_ms, True)
    gaps = np.array([e.gap_ms for e in events], dtype=float)
    mx = float(gaps.max())
    return HandoverStats(
        count=len(gaps),
        max_gap_ms=mx,
        mean_gap_ms=float(gaps.mean()),
        p95_gap_ms=float(np.percentile(gaps, 95)),
        target_ms=target_ms,
        passed=mx < target_ms,
    )
