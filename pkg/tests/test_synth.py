import json
from dataclasses import replace

import numpy as np
import pytest

from passivesense import synth
from passivesense.completeness import participant_completeness
from passivesense.ingest import parse_scan_log
from passivesense.mobility import cluster_stationary, estimate_speeds, State
from passivesense.model import StudySchedule, group_by_participant

from conftest import T0

TWO_WEEKS = StudySchedule.four_week(T0, intervals=(8, 5))


def small(**kw):
    base = dict(seed=3, n_participants=3, schedule=TWO_WEEKS, n_clusters=(2, 4))
    base.update(kw)
    return synth.SynthConfig(**base)


def test_deterministic(small_synth):
    cfg, lines, manifest = small_synth
    again = synth.generate(replace(cfg))
    assert again[0] == lines and again[1] == manifest


def test_seed_changes_output(small_synth):
    cfg, lines, _ = small_synth
    assert synth.generate(synth.with_seed(cfg, cfg.seed + 1))[0] != lines


def test_manifest_counts_match_records(small_synth):
    cfg, lines, manifest = small_synth
    events, errors = parse_scan_log(lines)
    assert not errors
    groups = group_by_participant(events)
    for p in manifest["participants"]:
        evs = groups[p["participant_id"]]
        for kind in ("bluetooth", "gps", "battery"):
            assert sum(e.kind.value == kind for e in evs) == p["emitted"][kind]
            assert p["scheduled"][kind] == 1260 + 2016  # 8 then 5 minute weeks


def test_full_delivery_is_complete():
    cfg = small(delivery_prob={"android": 1.0, "ios": 1.0}, n_participants=2)
    lines, _ = synth.generate(cfg)
    events, _ = parse_scan_log(lines)
    for pid, evs in group_by_participant(events).items():
        row = participant_completeness(pid, evs, cfg.schedule)
        assert row.completeness_pct == 100.0 and row.out_of_window == 0


def test_zero_delivery_emits_nothing():
    lines, manifest = synth.generate(small(delivery_prob={"android": 0.0, "ios": 0.0}))
    assert lines == [] and all(p["emitted"]["gps"] == 0 for p in manifest["participants"])


def test_participant_gps_matches_records(small_synth):
    cfg, lines, _ = small_synth
    for spec in synth.participant_specs(cfg):
        ts, lat, lon = synth.participant_gps(spec, cfg)
        recs = [json.loads(l) for l in lines
                if f'"participant_id":"{spec.participant_id}"' in l and '"kind":"gps"' in l]
        assert len(recs) == len(ts)
        assert [r["payload"]["latitude"] for r in recs] == lat.tolist()
        assert [r["payload"]["longitude"] for r in recs] == lon.tolist()


def test_removing_participant_leaves_others_unchanged():
    cfg = small()
    specs = synth.participant_specs(cfg)
    full, _ = synth.generate(cfg)
    partial, _ = synth.generate(replace(cfg, participants=[specs[0], specs[2]]))
    assert partial == [l for l in full if '"participant_id":"P02"' not in l]


def test_planted_clusters_recovered(small_synth):
    cfg, _, manifest = small_synth
    for spec, man in zip(synth.participant_specs(cfg), manifest["participants"]):
        ts, lat, lon = synth.participant_gps(spec, cfg)
        labeled = estimate_speeds(zip(ts, lat, lon))
        stat = np.array([f.state is State.STATIONARY for f in labeled])
        cs = cluster_stationary(lat[stat], lon[stat])
        assert cs.k == len(man["visited_clusters"])
        got = sorted(zip(*cs.center_latlon))
        want = sorted(tuple(man["cluster_centers"][i]) for i in man["visited_clusters"])
        np.testing.assert_allclose(got, want, atol=2e-4)  # about 20 m


def test_clusters_respect_separation():
    rng = np.random.default_rng(0)
    c = synth.place_clusters(10, 2500, rng)
    d = np.hypot(*(c[:, None, :] - c[None, :, :]).transpose(2, 0, 1))
    assert d[~np.eye(10, dtype=bool)].min() >= 2500


@pytest.mark.parametrize("bad", [
    dict(delivery_prob={"android": 1.5, "ios": 0.4}),
    dict(regularity=(0.2, 1.2)),
    dict(position_noise_m=400.0),
    dict(min_separation_m=1500.0),
    dict(n_clusters=0),
    dict(travel_speed_kmh=0.0),
])
def test_infeasible_configs_rejected(bad):
    with pytest.raises(ValueError):
        synth.generate(small(**bad))


def test_battery_trace_drains_and_resets(small_synth):
    cfg, lines, _ = small_synth
    levels = [json.loads(l)["payload"]["level_pct"] for l in lines
              if '"participant_id":"P01"' in l and '"kind":"battery"' in l]
    assert min(levels) >= 9.5 and max(levels) == pytest.approx(100, abs=0.1)
    assert sum(b > a + 5 for a, b in zip(levels, levels[1:])) >= 13  # daily reset


def test_traces_have_expected_shape():
    ts, lat, lon = synth.sinusoid_trace(1000, days=2, interval_minutes=10)
    assert len(ts) == 288 and np.all(np.diff(ts) == 600)
    ts, lat, lon = synth.commute_trace(seed=1, days=3, delivery_prob=0.5)
    assert 0.4 < len(ts) / (3 * 288) < 0.6
