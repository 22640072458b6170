"""Scheduled-scan accounting and data completeness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import stats
from .model import DeviceOS, ScanEvent, ScanKind, StudySchedule

MODES = ("mean", "pooled", "bluetooth", "gps")


def scheduled_count(schedule: StudySchedule) -> int:
    """Scans/hour times hours, summed over weeks; rounded half-up once at the end."""
    total = Fraction(0)
    for w in schedule.weeks:
        rate = Fraction(60) / Fraction(w.interval_minutes).limit_denominator(10**6)
        total += rate * Fraction(w.end - w.start, 3600)
    return math.floor(total + Fraction(1, 2))


def collected_count(events, schedule: StudySchedule, kind: ScanKind) -> tuple[int, int]:
    """(distinct in-window timestamps of ``kind``, out-of-window event count)."""
    inside, outside = set(), 0
    for e in events:
        if e.kind is not kind:
            continue
        if schedule.contains(e.timestamp):
            inside.add(e.timestamp)
        else:
            outside += 1
    return len(inside), outside


def completeness_pct(events, schedule: StudySchedule, kind: ScanKind) -> float:
    n = scheduled_count(schedule)
    if n == 0:
        raise ValueError("schedule has no scheduled scans")
    got, _ = collected_count(events, schedule, kind)
    return 100.0 * got / n


@dataclass
class CompletenessRow:
    participant_id: str
    os: str
    model: str | None
    scheduled: int
    collected: float
    completeness_pct: float
    out_of_window: int = 0


def participant_completeness(participant_id: str, events: list[ScanEvent],
                             schedule: StudySchedule, mode: str = "mean") -> CompletenessRow:
    """Completeness for one participant.

    ``mean`` averages the Bluetooth and GPS percentages; ``pooled`` counts a scan
    cycle once when either kind arrived at that timestamp.
    """
    if mode not in MODES:
        raise ValueError(f"unknown completeness mode {mode!r}")
    n = scheduled_count(schedule)
    if n == 0:
        raise ValueError("schedule has no scheduled scans")
    bt, out_bt = collected_count(events, schedule, ScanKind.BLUETOOTH)
    gps, out_gps = collected_count(events, schedule, ScanKind.GPS)
    if mode == "mean":
        collected = (bt + gps) / 2
    elif mode == "bluetooth":
        collected = bt
    elif mode == "gps":
        collected = gps
    else:
        collected = len({e.timestamp for e in events
                         if e.kind in (ScanKind.BLUETOOTH, ScanKind.GPS)
                         and schedule.contains(e.timestamp)})
    first = events[0] if events else None
    return CompletenessRow(
        participant_id=participant_id,
        os=first.device_os.value if first else "",
        model=first.device_model if first else None,
        scheduled=n,
        collected=collected,
        completeness_pct=100.0 * collected / n,
        out_of_window=out_bt + out_gps,
    )


@dataclass
class OSSummary:
    os: str
    n: int
    mean: float
    sd: float | None


def completeness_by_os(rows: list[CompletenessRow]):
    """Per-OS mean and sample SD, plus the Android-vs-iOS Student t-test when both have n >= 2."""
    groups: dict[str, list[float]] = {}
    for r in rows:
        groups.setdefault(r.os, []).append(r.completeness_pct)
    if not groups:
        raise ValueError("no participants")
    summaries = {}
    for os_, vals in sorted(groups.items()):
        a = np.asarray(vals, dtype=float)
        summaries[os_] = OSSummary(os_, len(a), float(a.mean()),
                                   float(a.std(ddof=1)) if len(a) > 1 else None)
    test = None
    a, i = groups.get(DeviceOS.ANDROID.value, []), groups.get(DeviceOS.IOS.value, [])
    if len(a) >= 2 and len(i) >= 2:
        try:
            test = stats.two_sample_t(a, i)
        except ValueError:
            test = None
    return summaries, test
