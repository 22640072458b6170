"""Bluetooth social context: known/unknown devices and hour-of-day density profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ScanKind, StudySchedule

DEFAULT_TZ_OFFSET_H = 10.0


def parse_tz_offset(text: str) -> float:
    """'+10:00' / '-03:30' / '+0530' -> hours."""
    s = text.strip()
    if s in ("Z", "z"):
        return 0.0
    if s[0] not in "+-":
        raise ValueError(f"timezone offset must start with + or -: {text!r}")
    sign = -1.0 if s[0] == "-" else 1.0
    body = s[1:].replace(":", "")
    if not body.isdigit() or len(body) not in (2, 4):
        raise ValueError(f"malformed timezone offset {text!r}")
    hours, minutes = int(body[:2]), int(body[2:] or 0)
    if minutes >= 60 or hours > 14:
        raise ValueError(f"timezone offset out of range {text!r}")
    return sign * (hours + minutes / 60.0)


def local_day(ts: int, tz_offset_h: float) -> int:
    return int((ts + round(tz_offset_h * 3600)) // 86400)


def local_hour(ts: int, tz_offset_h: float) -> int:
    return int(((ts + round(tz_offset_h * 3600)) % 86400) // 3600)


@dataclass(frozen=True)
class DeviceHistory:
    hashed_device_id: str
    days: frozenset
    count: int


def device_histories(events, tz_offset_h: float = DEFAULT_TZ_OFFSET_H) -> dict[str, DeviceHistory]:
    days: dict[str, set] = {}
    counts: dict[str, int] = {}
    for e in events:
        if e.kind is not ScanKind.BLUETOOTH:
            continue
        d = local_day(e.timestamp, tz_offset_h)
        for s in e.payload.sightings:
            days.setdefault(s.hashed_device_id, set()).add(d)
            counts[s.hashed_device_id] = counts.get(s.hashed_device_id, 0) + 1
    return {k: DeviceHistory(k, frozenset(days[k]), counts[k]) for k in sorted(days)}


@dataclass(frozen=True)
class Partition:
    known: frozenset
    unknown: frozenset


def classify_devices(events, min_days: int = 3,
                     tz_offset_h: float = DEFAULT_TZ_OFFSET_H) -> Partition:
    """A device is known when it was sighted on at least ``min_days`` local dates."""
    hist = device_histories(events, tz_offset_h)
    known = frozenset(k for k, h in hist.items() if len(h.days) >= min_days)
    return Partition(known, frozenset(hist) - known)


@dataclass(frozen=True)
class SocialProfile:
    mean_known: np.ndarray      # shape (24,)
    mean_unknown: np.ndarray
    day_counts: np.ndarray      # denominator per hour

    @property
    def denominator_days(self) -> int:
        return int(self.day_counts.max()) if len(self.day_counts) else 0

    def rows(self):
        return [(h, float(self.mean_known[h]), float(self.mean_unknown[h])) for h in range(24)]


def _schedule_hour_slots(schedule: StudySchedule, tz_offset_h: float) -> np.ndarray:
    """Number of local (date, hour) slots per hour of day overlapping the schedule."""
    counts = np.zeros(24, dtype=int)
    off = round(tz_offset_h * 3600)
    for w in schedule.weeks:
        first = (w.start + off) // 3600
        last = (w.end - 1 + off) // 3600
        for slot in range(first, last + 1):
            counts[slot % 24] += 1
    return counts


def social_profile(events, partition: Partition, tz_offset_h: float = DEFAULT_TZ_OFFSET_H,
                   schedule: StudySchedule | None = None, missing: str = "zero") -> SocialProfile:
    """Mean number of distinct known / unknown devices per local hour of day.

    ``missing='zero'`` averages over every study day (hours without scans count
    as zero); the study days come from ``schedule`` when given, else from the
    first to the last Bluetooth scan. ``missing='exclude'`` averages only over
    days that had at least one Bluetooth scan in that hour.
    """
    if missing not in ("zero", "exclude"):
        raise ValueError(f"unknown missing-hour policy {missing!r}")
    bt = [e for e in events if e.kind is ScanKind.BLUETOOTH]
    slots_known: dict[tuple[int, int], set] = {}
    slots_unknown: dict[tuple[int, int], set] = {}
    scanned: set[tuple[int, int]] = set()
    for e in bt:
        key = (local_day(e.timestamp, tz_offset_h), local_hour(e.timestamp, tz_offset_h))
        scanned.add(key)
        for s in e.payload.sightings:
            if s.hashed_device_id in partition.known:
                slots_known.setdefault(key, set()).add(s.hashed_device_id)
            else:
                slots_unknown.setdefault(key, set()).add(s.hashed_device_id)

    known_sum = np.zeros(24)
    unknown_sum = np.zeros(24)
    for (_, h), ids in slots_known.items():
        known_sum[h] += len(ids)
    for (_, h), ids in slots_unknown.items():
        unknown_sum[h] += len(ids)

    if missing == "exclude":
        days = np.zeros(24, dtype=int)
        for _, h in scanned:
            days[h] += 1
    elif schedule is not None and schedule.weeks:
        days = _schedule_hour_slots(schedule, tz_offset_h)
    elif bt:
        d = [local_day(e.timestamp, tz_offset_h) for e in bt]
        days = np.full(24, max(d) - min(d) + 1, dtype=int)
    else:
        days = np.zeros(24, dtype=int)

    safe = np.where(days > 0, days, 1)
    return SocialProfile(known_sum / safe, unknown_sum / safe, days)
