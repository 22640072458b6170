"""Core domain types for passive-sensing scan logs.

Timestamps are integer UTC seconds since the epoch throughout the package.
"""

from __future__ import annotations

import contextlib
import enum
import functools
import gc
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Union

HASH_HEX_LEN = 64
_HEX64 = re.compile(r"^[0-9a-f]{64}$")


class DeviceOS(str, enum.Enum):
    ANDROID = "android"
    IOS = "ios"


class ScanKind(str, enum.Enum):
    BLUETOOTH = "bluetooth"
    GPS = "gps"
    BATTERY = "battery"


class ValidationError(ValueError):
    """An event field violates its invariant."""

    def __init__(self, field_name: str, value, reason: str):
        self.field = field_name
        self.value = value
        self.reason = reason
        super().__init__(f"{field_name}: {reason} (got {value!r})")


@dataclass(frozen=True)
class BluetoothSighting:
    hashed_device_id: str
    class_of_device: int


@dataclass(frozen=True)
class BluetoothScan:
    sightings: tuple[BluetoothSighting, ...] = ()


@dataclass(frozen=True)
class GpsFix:
    latitude: float
    longitude: float
    accuracy_m: float | None = None


@dataclass(frozen=True)
class BatterySample:
    level_pct: float
    charging: bool


Payload = Union[BluetoothScan, GpsFix, BatterySample]

PAYLOAD_TYPES = {
    ScanKind.BLUETOOTH: BluetoothScan,
    ScanKind.GPS: GpsFix,
    ScanKind.BATTERY: BatterySample,
}


@dataclass(frozen=True)
class ScanEvent:
    participant_id: str
    device_os: DeviceOS
    timestamp: int
    kind: ScanKind
    payload: Payload
    device_model: str | None = None


@dataclass(frozen=True)
class ScheduleWeek:
    start: int
    end: int
    interval_minutes: float

    @property
    def hours(self) -> float:
        return (self.end - self.start) / 3600.0

    @property
    def scans_per_hour(self) -> float:
        return 60.0 / self.interval_minutes

    def contains(self, ts: int) -> bool:
        return self.start <= ts < self.end


@dataclass(frozen=True)
class StudySchedule:
    """Ordered, non-overlapping scanning weeks."""

    weeks: tuple[ScheduleWeek, ...] = ()

    def __post_init__(self):
        prev_end = None
        for w in self.weeks:
            if not w.interval_minutes > 0:
                raise ValueError(f"interval_minutes must be positive, got {w.interval_minutes}")
            if w.end <= w.start:
                raise ValueError("schedule week must end after it starts")
            if prev_end is not None and w.start < prev_end:
                raise ValueError("schedule weeks overlap or are out of order")
            prev_end = w.end

    @classmethod
    def four_week(cls, start: int, intervals=(8, 5, 4, 3), days: int = 7) -> "StudySchedule":
        """Consecutive weeks scanning at the given intervals, starting at ``start``."""
        span = days * 86400
        return cls(tuple(
            ScheduleWeek(start + i * span, start + (i + 1) * span, float(m))
            for i, m in enumerate(intervals)
        ))

    @property
    def start(self) -> int | None:
        return self.weeks[0].start if self.weeks else None

    @property
    def end(self) -> int | None:
        return self.weeks[-1].end if self.weeks else None

    def week_index(self, ts: int) -> int | None:
        for i, w in enumerate(self.weeks):
            if w.contains(ts):
                return i
        return None

    def contains(self, ts: int) -> bool:
        return self.week_index(ts) is not None

    def to_dict(self) -> dict:
        return {"weeks": [
            {"start": format_timestamp(w.start), "end": format_timestamp(w.end),
             "interval_minutes": w.interval_minutes}
            for w in self.weeks
        ]}

    @classmethod
    def from_dict(cls, d: dict) -> "StudySchedule":
        return cls(tuple(
            ScheduleWeek(parse_timestamp(w["start"]), parse_timestamp(w["end"]),
                         float(w["interval_minutes"]))
            for w in d.get("weeks", [])
        ))


@dataclass
class ParticipantFeatures:
    """Per-participant aggregate of all extracted markers."""

    participant_id: str
    device_os: DeviceOS
    device_model: str | None = None
    completeness_pct: float = 0.0
    social_profile: list[tuple[float, float]] = field(default_factory=list)
    cluster_count: int | None = None
    circadian_movement_by_week: list[tuple[int, float | None]] = field(default_factory=list)
    battery: object | None = None


def parse_timestamp(text: str) -> int:
    """ISO 8601 with explicit offset or 'Z' -> UTC epoch seconds."""
    if not isinstance(text, str):
        raise ValueError(f"timestamp must be a string, got {text!r}")
    return _parse_timestamp(text)


@functools.lru_cache(maxsize=4096)
def _parse_timestamp(text: str) -> int:
    s = text.strip()
    if s.endswith("Z") or s.endswith("z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp lacks a UTC offset: {text!r}")
    return int(dt.timestamp())


@contextlib.contextmanager
def gc_paused():
    """Suspend cycle collection while bulk-building acyclic records."""
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _check_real(name, value, lo, hi):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, value, "not a number")
    if not (lo <= value <= hi):
        raise ValidationError(name, value, f"{name} out of range")


def validate_event(event: ScanEvent, schedule: StudySchedule | None = None) -> ScanEvent:
    """Return ``event`` unchanged if every invariant holds, else raise ValidationError."""
    if not isinstance(event.participant_id, str) or not event.participant_id:
        raise ValidationError("participant_id", event.participant_id, "empty participant id")
    if not isinstance(event.device_os, DeviceOS):
        raise ValidationError("device_os", event.device_os, "unknown operating system")
    if not isinstance(event.kind, ScanKind):
        raise ValidationError("kind", event.kind, "unknown scan kind")
    if isinstance(event.timestamp, bool) or not isinstance(event.timestamp, int):
        raise ValidationError("timestamp", event.timestamp, "timestamp must be integer seconds")
    if event.device_model is not None and not isinstance(event.device_model, str):
        raise ValidationError("device_model", event.device_model, "device model must be text")
    if not isinstance(event.payload, PAYLOAD_TYPES[event.kind]):
        raise ValidationError("payload", type(event.payload).__name__, "kind/payload mismatch")
    if schedule is not None and schedule.weeks and not schedule.contains(event.timestamp):
        raise ValidationError("timestamp", format_timestamp(event.timestamp),
                              "timestamp outside study window")

    p = event.payload
    if isinstance(p, GpsFix):
        _check_real("latitude", p.latitude, -90.0, 90.0)
        _check_real("longitude", p.longitude, -180.0, 180.0)
        if p.accuracy_m is not None:
            _check_real("accuracy_m", p.accuracy_m, 0.0, float("inf"))
    elif isinstance(p, BatterySample):
        _check_real("level_pct", p.level_pct, 0.0, 100.0)
        if not isinstance(p.charging, bool):
            raise ValidationError("charging", p.charging, "charging flag must be boolean")
    else:
        seen = set()
        for s in p.sightings:
            if not isinstance(s, BluetoothSighting):
                raise ValidationError("sightings", s, "not a sighting")
            if not isinstance(s.hashed_device_id, str) or not _HEX64.match(s.hashed_device_id):
                raise ValidationError("hashed_device_id", s.hashed_device_id,
                                      "malformed hash (expected 64 lowercase hex chars)")
            cod = s.class_of_device
            if isinstance(cod, bool) or not isinstance(cod, int) or not 0 <= cod < 1 << 24:
                raise ValidationError("class_of_device", cod, "class_of_device out of range")
            if s.hashed_device_id in seen:
                raise ValidationError("hashed_device_id", s.hashed_device_id,
                                      "duplicate device within one scan")
            seen.add(s.hashed_device_id)
    return event


def event_to_record(event: ScanEvent) -> dict:
    """Serialize to the canonical line-delimited JSON record."""
    p = event.payload
    if isinstance(p, BluetoothScan):
        payload = {"sightings": [
            {"hashed_device_id": s.hashed_device_id, "class_of_device": s.class_of_device}
            for s in p.sightings
        ]}
    elif isinstance(p, GpsFix):
        payload = {"latitude": p.latitude, "longitude": p.longitude}
        if p.accuracy_m is not None:
            payload["accuracy_m"] = p.accuracy_m
    else:
        payload = {"level_pct": p.level_pct, "charging": p.charging}
    rec = {
        "participant_id": event.participant_id,
        "device_os": event.device_os.value,
        "timestamp": format_timestamp(event.timestamp),
        "kind": event.kind.value,
        "payload": payload,
    }
    if event.device_model is not None:
        rec["device_model"] = event.device_model
    return rec


def group_by_participant(events) -> dict[str, list[ScanEvent]]:
    """Events per participant, each list sorted by (timestamp, kind)."""
    out: dict[str, list[ScanEvent]] = {}
    for e in events:
        out.setdefault(e.participant_id, []).append(e)
    # enum members are singletons; keying on id() skips the slow Enum.__hash__
    order = {id(k): i for i, k in enumerate(ScanKind)}
    with gc_paused():
        for evs in out.values():
            evs.sort(key=lambda e: (e.timestamp, order[id(e.kind)]))
    return dict(sorted(out.items()))
