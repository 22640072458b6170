import pytest
from hypothesis import given, strategies as st

from passivesense.ingest import HashConfig, record_to_event
from passivesense.model import (
    BatterySample, BluetoothScan, BluetoothSighting, DeviceOS, GpsFix, ScanEvent, ScanKind,
    ScheduleWeek, StudySchedule, ValidationError, event_to_record, format_timestamp,
    parse_timestamp, validate_event,
)

from conftest import T0, bat, bt, dev, gps


def test_latitude_out_of_range():
    with pytest.raises(ValidationError, match="latitude out of range") as exc:
        validate_event(gps(T0, 91.0, 0.0))
    assert exc.value.field == "latitude"
    assert exc.value.value == 91.0


def test_full_battery_while_charging_is_valid():
    e = bat(T0, 100, charging=True)
    assert validate_event(e) is e


def test_kind_payload_mismatch():
    e = ScanEvent("P01", DeviceOS.IOS, T0, ScanKind.GPS, BluetoothScan(()))
    with pytest.raises(ValidationError, match="kind/payload mismatch"):
        validate_event(e)


@pytest.mark.parametrize("hid", ["ABC", "g" * 64, dev("x").upper(), dev("x")[:-1]])
def test_malformed_hash(hid):
    e = ScanEvent("P01", DeviceOS.IOS, T0, ScanKind.BLUETOOTH,
                  BluetoothScan((BluetoothSighting(hid, 0x200),)))
    with pytest.raises(ValidationError, match="malformed hash"):
        validate_event(e)


def test_duplicate_device_in_scan_rejected():
    e = ScanEvent("P01", DeviceOS.IOS, T0, ScanKind.BLUETOOTH,
                  BluetoothScan((BluetoothSighting(dev("a"), 0x200),) * 2))
    with pytest.raises(ValidationError, match="duplicate"):
        validate_event(e)


def test_class_of_device_bound():
    e = ScanEvent("P01", DeviceOS.IOS, T0, ScanKind.BLUETOOTH,
                  BluetoothScan((BluetoothSighting(dev("a"), 1 << 24),)))
    with pytest.raises(ValidationError):
        validate_event(e)


def test_empty_scan_is_valid():
    assert validate_event(bt(T0, [])).payload.sightings == ()


def test_schedule_window_checked_when_attached(one_week):
    validate_event(bt(T0, []), one_week)
    with pytest.raises(ValidationError, match="outside study window"):
        validate_event(bt(T0 - 1, []), one_week)


def test_schedule_rejects_overlap_and_bad_interval():
    with pytest.raises(ValueError):
        StudySchedule((ScheduleWeek(0, 100, 5), ScheduleWeek(50, 200, 5)))
    with pytest.raises(ValueError):
        StudySchedule((ScheduleWeek(0, 100, 0),))


def test_timestamp_parsing():
    assert parse_timestamp("2017-08-07T00:00:00+10:00") == T0
    assert format_timestamp(T0) == "2017-08-06T14:00:00Z"
    with pytest.raises(ValueError):
        parse_timestamp("2017-08-07T00:00:00")


def test_schedule_dict_round_trip(four_week_schedule):
    assert StudySchedule.from_dict(four_week_schedule.to_dict()) == four_week_schedule


ids = st.text(alphabet="0123456789abcdef", min_size=64, max_size=64)
events = st.one_of(
    st.builds(lambda ts, la, lo, acc: ScanEvent("P1", DeviceOS.ANDROID, ts, ScanKind.GPS,
                                                GpsFix(la, lo, acc)),
              st.integers(0, 4_000_000_000),
              st.floats(-90, 90), st.floats(-180, 180),
              st.one_of(st.none(), st.floats(0, 1e4))),
    st.builds(lambda ts, lvl, ch: ScanEvent("P2", DeviceOS.IOS, ts, ScanKind.BATTERY,
                                            BatterySample(lvl, ch), "iPhone 7"),
              st.integers(0, 4_000_000_000), st.floats(0, 100), st.booleans()),
    st.builds(lambda ts, hs, cod: ScanEvent("P3", DeviceOS.IOS, ts, ScanKind.BLUETOOTH,
                                            BluetoothScan(tuple(BluetoothSighting(h, cod)
                                                                for h in sorted(set(hs))))),
              st.integers(0, 4_000_000_000), st.lists(ids, max_size=4),
              st.integers(0, (1 << 24) - 1)),
)


@given(events)
def test_round_trip_through_record(e):
    validate_event(e)
    back = record_to_event(event_to_record(e), HashConfig(), filter_phones=False)
    assert back == e


@given(events)
def test_validate_is_idempotent(e):
    assert validate_event(validate_event(e)) == e
