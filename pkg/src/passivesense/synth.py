"""Deterministic synthetic scan logs with a ground-truth manifest.

Each participant lives on a set of planted location clusters (cluster 0 is
home, cluster 1 work) and follows a daily timetable on "regular" days or a
random itinerary otherwise. Scan cycles are delivered with a fixed
probability. Every participant draws from its own random streams, keyed on
(seed, participant index, stream), so removing one participant leaves the
others byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .completeness import scheduled_count
from .mobility import unproject
from .model import StudySchedule, gc_paused, parse_timestamp

DEFAULT_START = "2017-08-06T14:00:00Z"  # local midnight at UTC+10

PHONE_COD = 0x5A020C
HEADSET_COD = 0x240404
ANDROID_MODELS = ("SM-G930F", "Pixel 2", "Moto G5", "SM-A520F", "Nexus 5X")
IOS_MODELS = ("iPhone 6s", "iPhone 7", "iPhone 8", "iPhone SE", "iPhone X")

_STREAM = {"spec": 0, "clusters": 1, "itinerary": 2, "delivery": 3,
           "noise": 4, "bluetooth": 5, "battery": 6}


def four_week_schedule(start: str = DEFAULT_START) -> StudySchedule:
    return StudySchedule.four_week(parse_timestamp(start))


@dataclass(frozen=True)
class ParticipantSpec:
    participant_id: str
    index: int
    device_os: str
    device_model: str
    n_clusters: int
    regularity: float
    delivery_prob: float
    battery_c0: float
    battery_k: float
    origin: tuple[float, float]


@dataclass
class SynthConfig:
    seed: int = 0
    n_participants: int = 4
    schedule: StudySchedule = field(default_factory=four_week_schedule)
    tz_offset_h: float = 10.0
    n_clusters: int | tuple[int, int] = (4, 12)
    regularity: float | tuple[float, float] = (0.5, 1.0)
    period_h: float = 24.0
    position_noise_m: float = 10.0
    min_separation_m: float = 2500.0
    well_separated: bool = True
    travel_speed_kmh: float = 40.0
    delivery_prob: dict = field(default_factory=lambda: {"android": 0.55, "ios": 0.45})
    android_fraction: float = 0.5
    n_household: int = 2
    n_household_other: int = 1
    n_colleagues: int = 3
    crowd_rate: float = 2.0
    battery_c0: float = 100 / 21.3
    battery_k: float = (100 / 18.8 - 100 / 21.3) / 12
    battery_device_sd: float = 0.0
    battery_noise: float = 0.02
    participants: list[ParticipantSpec] | None = None

    def validate(self):
        probs = list(self.delivery_prob.values()) + [self.android_fraction]
        if isinstance(self.regularity, tuple):
            probs += list(self.regularity)
        else:
            probs.append(self.regularity)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        cluster_radius = 4 * self.position_noise_m
        if cluster_radius >= self.min_separation_m / 2:
            raise ValueError("cluster radius must be below half the cluster separation")
        if self.well_separated and self.min_separation_m <= 4 * 500.0:
            raise ValueError("well-separated clusters need separation above 2000 m")
        if self.period_h <= 0 or self.travel_speed_kmh <= 0:
            raise ValueError("period and travel speed must be positive")
        lo = self.n_clusters[0] if isinstance(self.n_clusters, tuple) else self.n_clusters
        if lo < 1:
            raise ValueError("need at least one cluster")


def _rng(seed: int, index: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index, _STREAM[stream]]))


def _draw(value, rng, integer=False):
    if isinstance(value, tuple):
        lo, hi = value
        return int(rng.integers(lo, hi + 1)) if integer else float(rng.uniform(lo, hi))
    return value


def participant_specs(cfg: SynthConfig) -> list[ParticipantSpec]:
    if cfg.participants is not None:
        return list(cfg.participants)
    specs = []
    for i in range(cfg.n_participants):
        rng = _rng(cfg.seed, i, "spec")
        os_ = "android" if rng.random() < cfg.android_fraction else "ios"
        models = ANDROID_MODELS if os_ == "android" else IOS_MODELS
        specs.append(ParticipantSpec(
            participant_id=f"P{i + 1:02d}",
            index=i,
            device_os=os_,
            device_model=models[int(rng.integers(len(models)))],
            n_clusters=_draw(cfg.n_clusters, rng, integer=True),
            regularity=_draw(cfg.regularity, rng),
            delivery_prob=float(cfg.delivery_prob[os_]),
            battery_c0=float(cfg.battery_c0 + cfg.battery_device_sd * rng.standard_normal()),
            battery_k=float(cfg.battery_k),
            origin=(float(-33.87 + rng.uniform(-0.5, 0.5)), float(151.0 + rng.uniform(-0.5, 0.5))),
        ))
    return specs


def _scan_times(schedule: StudySchedule):
    times, rates = [], []
    for w in schedule.weeks:
        n = scheduled_count(StudySchedule((w,)))
        step = w.interval_minutes * 60.0
        t = w.start + np.floor(np.arange(n) * step).astype(np.int64)
        times.append(t[t < w.end])
        rates.append(np.full(len(times[-1]), w.scans_per_hour))
    if not times:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(times), np.concatenate(rates)


def place_clusters(k: int, min_sep: float, rng: np.random.Generator) -> np.ndarray:
    """Home at the origin, others uniform in a disk with pairwise spacing >= min_sep."""
    centers = [np.zeros(2)]
    radius = min_sep * (1.0 + 0.9 * math.sqrt(k))
    for _ in range(k - 1):
        for _attempt in range(10_000):
            r = radius * math.sqrt(rng.random())
            a = 2 * math.pi * rng.random()
            c = np.array([r * math.cos(a), r * math.sin(a)])
            if all(np.hypot(*(c - o)) >= min_sep for o in centers):
                centers.append(c)
                break
        else:
            raise ValueError(f"cannot place {k} clusters {min_sep} m apart")
    return np.array(centers)


def _regular_plan(k: int, cycle: int, period_h: float):
    """(departure hour within the cycle, destination) for a routine day."""
    if k == 1:
        return []
    m = k - 2
    a = 2 + (2 * cycle) % m if m else 1
    b = 2 + (2 * cycle + 1) % m if m else 1
    s = period_h / 24.0
    return [(8.0 * s, 1), (12.0 * s, a), (13.5 * s, 1), (17.0 * s, b), (19.0 * s, 0)]


def _itinerary(k, centers, regularity, period_h, speed_ms, scan_t, t_first, t_last, rng):
    """Knot times/positions of a piecewise-linear path plus stay intervals."""
    n_cycles = int(math.ceil((t_last - t_first) / (period_h * 3600))) + 1
    departures = []
    for c in range(n_cycles):
        base = t_first + c * period_h * 3600
        if rng.random() < regularity:
            plan = _regular_plan(k, c, period_h)
        else:
            n_dep = int(rng.integers(3, 6))
            hours = np.sort(rng.uniform(0, period_h, n_dep))
            plan = [(float(h), int(rng.integers(k))) for h in hours]
        departures += [(base + h * 3600, dest) for h, dest in plan]

    knot_t, knot_xy = [float(t_first) - 1.0], [centers[0]]
    stays = []  # (start, end, cluster)
    cur, stay_start, free_at = 0, float(t_first) - 1.0, float(t_first)
    for t_plan, dest in departures:
        if dest == cur or t_plan > t_last:
            continue
        j = int(np.searchsorted(scan_t, t_plan, side="left"))
        if j >= len(scan_t):
            break
        t_dep = float(scan_t[j])
        if t_dep < free_at + 900:
            continue
        travel = float(np.hypot(*(centers[dest] - centers[cur]))) / speed_ms
        stays.append((stay_start, t_dep, cur))
        knot_t += [t_dep, t_dep + travel]
        knot_xy += [centers[cur], centers[dest]]
        cur, stay_start, free_at = dest, t_dep + travel, t_dep + travel
    stays.append((stay_start, float(t_last) + 1.0, cur))
    knot_t.append(float(t_last) + 1.0)
    knot_xy.append(centers[cur])
    return np.array(knot_t), np.array(knot_xy), stays


def _stay_cluster(t, stays):
    starts = np.array([s[0] for s in stays])
    ends = np.array([s[1] for s in stays])
    clus = np.array([s[2] for s in stays])
    idx = np.searchsorted(starts, t, side="right") - 1
    idx = np.clip(idx, 0, len(stays) - 1)
    inside = (t >= starts[idx]) & (t <= ends[idx])
    return np.where(inside, clus[idx], -1)


def _random_macs(rng, n):
    raw = rng.integers(0, 256, size=(n, 6), dtype=np.uint8)
    return [row.tobytes().hex(":") for row in raw]


def _local_hour(t, tz_offset_h):
    return ((t + round(tz_offset_h * 3600)) % 86400) // 3600


def _trajectory(spec: ParticipantSpec, cfg: SynthConfig, scan_t: np.ndarray):
    """Noise-free positions (m), stay cluster per scan, centers, itinerary."""
    centers = place_clusters(spec.n_clusters, cfg.min_separation_m,
                             _rng(cfg.seed, spec.index, "clusters"))
    off = round(cfg.tz_offset_h * 3600)
    start = int(scan_t[0])
    t_first = ((start + off) // 86400) * 86400 - off  # local midnight
    knot_t, knot_xy, stays = _itinerary(
        spec.n_clusters, centers, spec.regularity, cfg.period_h,
        cfg.travel_speed_kmh / 3.6, scan_t, t_first, int(scan_t[-1]),
        _rng(cfg.seed, spec.index, "itinerary"))
    x = np.interp(scan_t, knot_t, knot_xy[:, 0])
    y = np.interp(scan_t, knot_t, knot_xy[:, 1])
    return np.column_stack([x, y]), _stay_cluster(scan_t.astype(float), stays), centers


def _battery_levels(spec, cfg, scan_t, scan_rate, rng):
    off = round(cfg.tz_offset_h * 3600)
    reset_hour = 7
    level = np.empty(len(scan_t))
    cur = 100.0
    for i in range(len(scan_t)):
        if i:
            dt = (scan_t[i] - scan_t[i - 1]) / 3600.0
            cur -= (spec.battery_c0 + spec.battery_k * scan_rate[i]) * dt
            d0 = (scan_t[i - 1] + off - reset_hour * 3600) // 86400
            d1 = (scan_t[i] + off - reset_hour * 3600) // 86400
            if d1 != d0 or cur < 10.0:
                cur = 100.0
        level[i] = cur
    noisy = level + cfg.battery_noise * rng.standard_normal(len(level))
    return np.clip(noisy, 0.0, 100.0)


def _positions(spec, cfg, scan_t):
    delivered = _rng(cfg.seed, spec.index, "delivery").random(len(scan_t)) < spec.delivery_prob
    xy, stay, centers = _trajectory(spec, cfg, scan_t)
    noise = _rng(cfg.seed, spec.index, "noise").standard_normal(xy.shape) * cfg.position_noise_m
    lat, lon = unproject(xy + noise, spec.origin)
    return delivered, lat, lon, stay, centers


def participant_gps(spec: ParticipantSpec, cfg: SynthConfig):
    """Delivered GPS fixes (timestamps, lat, lon) exactly as ``generate`` would emit them."""
    scan_t, _ = _scan_times(cfg.schedule)
    if len(scan_t) == 0:
        return scan_t, np.zeros(0), np.zeros(0)
    delivered, lat, lon, _, _ = _positions(spec, cfg, scan_t)
    return (scan_t[delivered], np.round(lat[delivered], 7), np.round(lon[delivered], 7))


def generate_participant(spec: ParticipantSpec, cfg: SynthConfig):
    """(list of JSON-ready records, manifest entry) for one participant."""
    scan_t, scan_rate = _scan_times(cfg.schedule)
    manifest = {
        "participant_id": spec.participant_id,
        "device_os": spec.device_os,
        "device_model": spec.device_model,
        "n_clusters": spec.n_clusters,
        "regularity": spec.regularity,
        "period_h": cfg.period_h,
        "delivery_prob": spec.delivery_prob,
        "scheduled": {k: int(len(scan_t)) for k in ("bluetooth", "gps", "battery")},
    }
    if len(scan_t) == 0:
        manifest["emitted"] = {k: 0 for k in ("bluetooth", "gps", "battery")}
        return [], manifest

    delivered, lat, lon, stay, centers = _positions(spec, cfg, scan_t)
    c_lat, c_lon = unproject(centers, spec.origin)

    bt_rng = _rng(cfg.seed, spec.index, "bluetooth")
    household = _random_macs(bt_rng, cfg.n_household)
    household_other = _random_macs(bt_rng, cfg.n_household_other)
    colleagues = _random_macs(bt_rng, cfg.n_colleagues) if spec.n_clusters > 1 else []
    hour = _local_hour(scan_t, cfg.tz_offset_h)

    levels = _battery_levels(spec, cfg, scan_t, scan_rate,
                             _rng(cfg.seed, spec.index, "battery"))

    base = {"participant_id": spec.participant_id, "device_os": spec.device_os,
            "device_model": spec.device_model}
    idx = np.flatnonzero(delivered)
    at = stay[idx].astype(int)
    day = (scan_t[idx] + round(cfg.tz_offset_h * 3600)) // 86400
    # all Bluetooth draws up front, in a fixed order
    home_seen = bt_rng.random((len(idx), len(household))) < 0.9
    other_seen = bt_rng.random((len(idx), len(household_other))) < 0.9
    work_seen = bt_rng.random((len(idx), len(colleagues))) < 0.7
    lam = np.where(at == 0, 0.0, cfg.crowd_rate * np.where((hour[idx] >= 9) & (hour[idx] < 17), 1.0, 0.3))
    n_phone = bt_rng.poisson(lam)
    n_other = bt_rng.poisson(0.5 * lam)
    crowd = _random_macs(bt_rng, int(n_phone.sum() + n_other.sum()))
    stamps = np.datetime_as_string(scan_t[idx].astype("datetime64[s]"), unit="s")

    records = []
    known_days: dict[str, set] = {}
    next_crowd = 0
    for j, i in enumerate(idx):
        ts = f"{stamps[j]}Z"
        sightings = []
        if at[j] == 0:
            for mac in (m for m, hit in zip(household, home_seen[j]) if hit):
                sightings.append({"mac": mac, "class_of_device": PHONE_COD})
                known_days.setdefault(mac, set()).add(int(day[j]))
            for mac in (m for m, hit in zip(household_other, other_seen[j]) if hit):
                sightings.append({"mac": mac, "class_of_device": HEADSET_COD})
        else:
            if at[j] == 1:
                for mac in (m for m, hit in zip(colleagues, work_seen[j]) if hit):
                    sightings.append({"mac": mac, "class_of_device": PHONE_COD})
                    known_days.setdefault(mac, set()).add(int(day[j]))
            for cod, count in ((PHONE_COD, int(n_phone[j])), (HEADSET_COD, int(n_other[j]))):
                for mac in crowd[next_crowd:next_crowd + count]:
                    sightings.append({"mac": mac, "class_of_device": cod})
                next_crowd += count
        records.append({**base, "timestamp": ts, "kind": "bluetooth",
                        "payload": {"sightings": sightings}})
        records.append({**base, "timestamp": ts, "kind": "gps",
                        "payload": {"latitude": round(float(lat[i]), 7),
                                    "longitude": round(float(lon[i]), 7),
                                    "accuracy_m": cfg.position_noise_m}})
        records.append({**base, "timestamp": ts, "kind": "battery",
                        "payload": {"level_pct": round(float(levels[i]), 3), "charging": False}})
    visited = set(int(v) for v in at[at >= 0])

    n = int(delivered.sum())
    manifest.update({
        "cluster_centers": [[float(a), float(b)] for a, b in zip(c_lat, c_lon)],
        "visited_clusters": sorted(int(v) for v in visited),
        "routine_amplitude_m": float(np.hypot(*centers[1])) if spec.n_clusters > 1 else 0.0,
        "known_device_macs": sorted(m for m, d in known_days.items() if len(d) >= 3),
        "known_non_phone_macs": sorted(household_other),
        "battery": {
            "c0": spec.battery_c0,
            "k": spec.battery_k,
            "weekly_rates": [spec.battery_c0 + spec.battery_k * w.scans_per_hour
                             for w in cfg.schedule.weeks],
        },
        "emitted": {k: n for k in ("bluetooth", "gps", "battery")},
    })
    return records, manifest


_ENCODER = json.JSONEncoder(sort_keys=True, separators=(",", ":"))


def dumps_record(rec: dict) -> str:
    return _ENCODER.encode(rec)


def generate(cfg: SynthConfig) -> tuple[list[str], dict]:
    """Scan-log lines and the ground-truth manifest; identical configs give identical bytes."""
    cfg.validate()
    lines, people = [], []
    with gc_paused():
        for spec in participant_specs(cfg):
            recs, man = generate_participant(spec, cfg)
            lines += [dumps_record(r) for r in recs]
            people.append(man)
    manifest = {
        "seed": cfg.seed,
        "tz_offset_h": cfg.tz_offset_h,
        "schedule": cfg.schedule.to_dict(),
        "population": {"battery_c0": cfg.battery_c0, "battery_k": cfg.battery_k},
        "participants": people,
    }
    return lines, manifest


def commute_trace(seed: int = 0, days: int = 7, interval_minutes: float = 5.0,
                  amplitude_m: float = 5000.0, regularity: float = 1.0,
                  noise_m: float = 10.0, delivery_prob: float = 1.0):
    """Home-work trace (timestamps, lat, lon) with a 24 h routine; no other output."""
    start = parse_timestamp(DEFAULT_START)
    sched = StudySchedule.four_week(start, intervals=(interval_minutes,), days=days)
    cfg = SynthConfig(seed=seed, schedule=sched, position_noise_m=noise_m,
                      min_separation_m=max(amplitude_m, 8 * noise_m + 1),
                      well_separated=False)
    spec = ParticipantSpec("T", 0, "android", "synthetic", 2, regularity, delivery_prob,
                           cfg.battery_c0, cfg.battery_k, (-33.87, 151.21))
    scan_t, _ = _scan_times(sched)
    xy, _, centers = _trajectory(spec, cfg, scan_t)
    # rescale so work sits exactly amplitude_m from home
    xy = xy * (amplitude_m / max(np.hypot(*centers[1]), 1e-9))
    rng = _rng(seed, 0, "noise")
    xy = xy + rng.standard_normal(xy.shape) * noise_m
    keep = _rng(seed, 0, "delivery").random(len(scan_t)) < delivery_prob
    lat, lon = unproject(xy[keep], spec.origin)
    return scan_t[keep], lat, lon


def sinusoid_trace(amplitude_m: float, seed: int = 0, days: int = 7,
                   interval_minutes: float = 5.0, period_h: float = 24.0,
                   noise_m: float = 10.0, origin=(-33.87, 151.21)):
    """Position oscillating with the given amplitude and period, plus Gaussian noise."""
    start = parse_timestamp(DEFAULT_START)
    n = int(days * 24 * 60 / interval_minutes)
    ts = start + np.floor(np.arange(n) * interval_minutes * 60).astype(np.int64)
    phase = 2 * np.pi * (ts - start) / (period_h * 3600)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 99]))
    xy = np.column_stack([amplitude_m * np.sin(phase), 0.5 * amplitude_m * np.cos(phase)])
    xy = xy + rng.standard_normal(xy.shape) * noise_m
    lat, lon = unproject(xy, origin)
    return ts, lat, lon


def with_seed(cfg: SynthConfig, seed: int) -> SynthConfig:
    return replace(cfg, seed=seed)
