"""Scan-log parsing and deidentification.

Input is UTF-8 line-delimited JSON, one record per line::

    {"participant_id": "P01", "device_os": "android", "device_model": "SM-G930F",
     "timestamp": "2017-08-07T09:03:00+10:00", "kind": "bluetooth",
     "payload": {"sightings": [{"mac": "00:11:22:33:44:55", "class_of_device": 524]}}

Bluetooth sightings carry either a raw ``mac`` (hashed here) or a
``hashed_device_id`` exported by the handset. Unknown keys are ignored.
"""

from __future__ import annotations

import functools
import hashlib
import json
import re
from dataclasses import dataclass
from typing import Iterable

from .model import (
    BatterySample,
    BluetoothScan,
    BluetoothSighting,
    DeviceOS,
    GpsFix,
    ScanEvent,
    ScanKind,
    ValidationError,
    gc_paused,
    parse_timestamp,
    validate_event,
)

PHONE_MAJOR_CLASS = 0x0200
MAJOR_CLASS_MASK = 0x1F00

DEFAULT_SALT = b"passivesense-synthetic"

_OS = {m.value: m for m in DeviceOS}
_KIND = {m.value: m for m in ScanKind}

_MAC_RE = re.compile(r"^[0-9A-Fa-f]{2}([:-]?[0-9A-Fa-f]{2}){5}$")


@dataclass(frozen=True)
class HashConfig:
    salt: bytes = DEFAULT_SALT
    unsalted: bool = False
    algorithm: str = "sha256"

    def __post_init__(self):
        if self.algorithm != "sha256":
            raise ValueError("only sha256 is supported")
        if not self.unsalted and not self.salt:
            raise ValueError("salt must be non-empty (pass unsalted=True to hash without one)")
        if self.unsalted and self.salt:
            raise ValueError("unsalted hashing takes no salt")

    @classmethod
    def without_salt(cls) -> "HashConfig":
        return cls(salt=b"", unsalted=True)


@dataclass(frozen=True)
class LineError:
    line: int
    reason: str

    def __str__(self):
        return f"line {self.line}: {self.reason}"


def mac_to_bytes(mac) -> bytes:
    if isinstance(mac, (bytes, bytearray)):
        b = bytes(mac)
    elif isinstance(mac, str) and _MAC_RE.match(mac.strip()):
        b = bytes.fromhex(re.sub(r"[:-]", "", mac.strip()))
    else:
        raise ValueError(f"malformed MAC address {mac!r}")
    if len(b) != 6:
        raise ValueError(f"device identifier must be 6 bytes, got {len(b)}")
    return b


def hash_device_id(mac, cfg: HashConfig) -> str:
    """Lowercase hex SHA-256 of ``salt || mac``."""
    if isinstance(mac, str):
        return _hash_text(mac, cfg.salt)
    return hashlib.sha256(cfg.salt + mac_to_bytes(mac)).hexdigest()


@functools.lru_cache(maxsize=65536)
def _hash_text(mac: str, salt: bytes) -> str:
    # the same handful of devices recur across thousands of scans
    return hashlib.sha256(salt + mac_to_bytes(mac)).hexdigest()


def is_phone_device(class_of_device: int) -> bool:
    """True when the major device class field (bits 12-8) is Phone."""
    return (class_of_device & MAJOR_CLASS_MASK) == PHONE_MAJOR_CLASS


def _as_int(value, name):
    if isinstance(value, bool):
        raise ValidationError(name, value, "not an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value, 0)
        except ValueError:
            pass
    raise ValidationError(name, value, "not an integer")


def _as_float(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, value, "not a number")
    return float(value)


def _payload(kind: ScanKind, raw, cfg: HashConfig, filter_phones: bool):
    if not isinstance(raw, dict):
        raise ValidationError("payload", raw, "payload must be an object")
    if kind is ScanKind.BLUETOOTH:
        if "sightings" not in raw:
            raise ValidationError("payload", sorted(raw), "kind/payload mismatch")
        items = raw["sightings"]
        if not isinstance(items, list):
            raise ValidationError("sightings", items, "sightings must be a list")
        out = []
        for s in items:
            if not isinstance(s, dict):
                raise ValidationError("sightings", s, "sighting must be an object")
            cod = _as_int(s.get("class_of_device"), "class_of_device")
            if not 0 <= cod < 1 << 24:
                raise ValidationError("class_of_device", cod, "class_of_device out of range")
            if "hashed_device_id" in s:
                hid = s["hashed_device_id"]
            elif "mac" in s:
                try:
                    hid = hash_device_id(s["mac"], cfg)
                except ValueError as exc:
                    raise ValidationError("mac", s["mac"], str(exc)) from None
            else:
                raise ValidationError("sightings", s, "sighting has neither mac nor hashed_device_id")
            if filter_phones and not is_phone_device(cod):
                continue
            out.append(BluetoothSighting(hid, cod))
        return BluetoothScan(tuple(out))
    if kind is ScanKind.GPS:
        if "latitude" not in raw or "longitude" not in raw:
            raise ValidationError("payload", sorted(raw), "kind/payload mismatch")
        acc = raw.get("accuracy_m")
        return GpsFix(_as_float(raw["latitude"], "latitude"),
                      _as_float(raw["longitude"], "longitude"),
                      None if acc is None else _as_float(acc, "accuracy_m"))
    if "level_pct" not in raw or "charging" not in raw:
        raise ValidationError("payload", sorted(raw), "kind/payload mismatch")
    return BatterySample(_as_float(raw["level_pct"], "level_pct"), raw["charging"])


def record_to_event(rec, cfg: HashConfig, filter_phones: bool = True) -> ScanEvent:
    """Build and validate one ScanEvent from a decoded JSON record."""
    if not isinstance(rec, dict):
        raise ValidationError("record", rec, "record must be a JSON object")
    for key in ("participant_id", "device_os", "timestamp", "kind", "payload"):
        if key not in rec:
            raise ValidationError(key, None, "missing required key")
    os_ = _OS.get(rec["device_os"]) if isinstance(rec["device_os"], str) else None
    if os_ is None:
        raise ValidationError("device_os", rec["device_os"], "unknown operating system")
    kind = _KIND.get(rec["kind"]) if isinstance(rec["kind"], str) else None
    if kind is None:
        raise ValidationError("kind", rec["kind"], "unknown scan kind")
    try:
        ts = parse_timestamp(rec["timestamp"])
    except ValueError as exc:
        raise ValidationError("timestamp", rec["timestamp"], str(exc)) from None
    pid = rec["participant_id"]
    if not isinstance(pid, str):
        raise ValidationError("participant_id", pid, "participant id must be a string")
    event = ScanEvent(
        participant_id=pid,
        device_os=os_,
        timestamp=ts,
        kind=kind,
        payload=_payload(kind, rec["payload"], cfg, filter_phones),
        device_model=rec.get("device_model"),
    )
    return validate_event(event)


def parse_scan_log(lines: Iterable[str], cfg: HashConfig | None = None,
                   filter_phones: bool = True) -> tuple[list[ScanEvent], list[LineError]]:
    """Parse every non-empty line; malformed lines become LineErrors, never exceptions."""
    cfg = cfg or HashConfig()
    with gc_paused():
        return _parse_lines(lines, cfg, filter_phones)


def _parse_lines(lines, cfg, filter_phones):
    events: list[ScanEvent] = []
    errors: list[LineError] = []
    for n, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                errors.append(LineError(n, "invalid UTF-8"))
                continue
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(LineError(n, f"invalid JSON ({exc.msg})"))
            continue
        try:
            events.append(record_to_event(rec, cfg, filter_phones))
        except ValidationError as exc:
            errors.append(LineError(n, str(exc)))
    return events, errors
