import hashlib
import sys

import pytest

from passivesense import synth
from passivesense.model import (
    BatterySample, BluetoothScan, BluetoothSighting, DeviceOS, GpsFix, ScanEvent, ScanKind,
    StudySchedule, parse_timestamp,
)

T0 = parse_timestamp("2017-08-06T14:00:00Z")  # local midnight, UTC+10


def dev(name: str) -> str:
    return hashlib.sha256(name.encode()).hexdigest()


def bt(ts, ids, pid="P01", os_=DeviceOS.ANDROID, cod=0x5A020C):
    return ScanEvent(pid, os_, int(ts), ScanKind.BLUETOOTH,
                     BluetoothScan(tuple(BluetoothSighting(dev(i), cod) for i in ids)))


def gps(ts, lat, lon, pid="P01", os_=DeviceOS.ANDROID):
    return ScanEvent(pid, os_, int(ts), ScanKind.GPS, GpsFix(float(lat), float(lon)))


def bat(ts, level, charging=False, pid="P01", os_=DeviceOS.ANDROID):
    return ScanEvent(pid, os_, int(ts), ScanKind.BATTERY, BatterySample(float(level), charging))


@pytest.fixture
def one_week():
    return StudySchedule.four_week(T0, intervals=(60,))


@pytest.fixture
def four_week_schedule():
    return StudySchedule.four_week(T0)


@pytest.fixture(scope="session")
def small_synth():
    """Two participants over a 2-week schedule, plus their manifest."""
    cfg = synth.SynthConfig(seed=11, n_participants=2,
                            schedule=StudySchedule.four_week(T0, intervals=(8, 5)),
                            n_clusters=(3, 5), regularity=(0.8, 1.0))
    lines, manifest = synth.generate(cfg)
    return cfg, lines, manifest


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
