"""GPS mobility features: speed-based state labels, location clusters, circadian movement."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import ScanEvent, ScanKind
from .spectral import frequency_grid, lomb_scargle

EARTH_RADIUS_M = 6_371_000.0
SPEED_THRESHOLD_KMH = 1.0
RADIUS_THRESHOLD_M = 500.0


class State(str, enum.Enum):
    STATIONARY = "stationary"
    TRANSITION = "transition"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class LabeledFix:
    timestamp: int
    latitude: float
    longitude: float
    speed_kmh: float | None
    state: State


def haversine_m(lat1, lon1, lat2, lon2):
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = (np.sin((lat2 - lat1) / 2) ** 2
         + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def gps_series(events) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(timestamps, lat, lon) of GPS events, time-sorted, one fix per timestamp."""
    seen = {}
    for e in events:
        if e.kind is ScanKind.GPS and e.timestamp not in seen:
            seen[e.timestamp] = e.payload
    ts = np.array(sorted(seen), dtype=np.int64)
    lat = np.array([seen[t].latitude for t in ts], dtype=float)
    lon = np.array([seen[t].longitude for t in ts], dtype=float)
    return ts, lat, lon


def estimate_speeds(fixes, max_gap_minutes: float = 30.0,
                    threshold_kmh: float = SPEED_THRESHOLD_KMH) -> list[LabeledFix]:
    """Label each fix by its speed from the previous fix.

    ``fixes`` is a sequence of GPS ScanEvents or (timestamp, lat, lon) tuples,
    strictly increasing in time. The first fix and fixes after a gap longer than
    ``max_gap_minutes`` are unlabeled.
    """
    rows = []
    for f in fixes:
        if isinstance(f, ScanEvent):
            rows.append((f.timestamp, f.payload.latitude, f.payload.longitude))
        else:
            rows.append(tuple(f))
    if not rows:
        return []
    ts = np.array([r[0] for r in rows], dtype=float)
    lat = np.array([r[1] for r in rows], dtype=float)
    lon = np.array([r[2] for r in rows], dtype=float)
    dt = np.diff(ts)
    if np.any(dt <= 0):
        raise ValueError("fixes must have strictly increasing timestamps")
    dist = haversine_m(lat[:-1], lon[:-1], lat[1:], lon[1:])
    speed = dist / dt * 3.6

    out = [LabeledFix(int(ts[0]), lat[0], lon[0], None, State.UNLABELED)]
    for i in range(1, len(ts)):
        v = float(speed[i - 1])
        if dt[i - 1] > max_gap_minutes * 60:
            state = State.UNLABELED
        elif v < threshold_kmh:
            state = State.STATIONARY
        else:
            state = State.TRANSITION
        out.append(LabeledFix(int(ts[i]), float(lat[i]), float(lon[i]), v, state))
    return out


def project(lat, lon, origin: tuple[float, float]) -> np.ndarray:
    """Equirectangular projection to metres around ``origin`` (lat0, lon0)."""
    lat0, lon0 = origin
    x = EARTH_RADIUS_M * np.radians(np.asarray(lon, dtype=float) - lon0) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS_M * np.radians(np.asarray(lat, dtype=float) - lat0)
    return np.column_stack([x, y])


def unproject(xy, origin: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    lat0, lon0 = origin
    xy = np.atleast_2d(xy)
    lat = lat0 + np.degrees(xy[:, 1] / EARTH_RADIUS_M)
    lon = lon0 + np.degrees(xy[:, 0] / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lon


def _kmeans_pp(points, k, rng):
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers[j] = points[idx]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def _sq_dist(points, centers):
    return ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def kmeans(points, k: int, rng: np.random.Generator, n_init: int = 10,
           max_iter: int = 300) -> tuple[np.ndarray, np.ndarray, float]:
    """Lloyd's algorithm with k-means++ seeding; best of ``n_init`` by inertia."""
    points = np.asarray(points, dtype=float)
    best = None
    for _ in range(n_init):
        centers = _kmeans_pp(points, k, rng)
        for _ in range(max_iter):
            d2 = _sq_dist(points, centers)
            labels = d2.argmin(axis=1)
            counts = np.bincount(labels, minlength=k)
            new = np.empty_like(centers)
            for dim in range(points.shape[1]):
                new[:, dim] = np.bincount(labels, weights=points[:, dim], minlength=k)
            nonempty = counts > 0
            new[nonempty] /= counts[nonempty, None]
            if not nonempty.all():
                # reseed empty clusters at the points worst served
                worst = np.argsort(d2[np.arange(len(points)), labels])[::-1]
                new[~nonempty] = points[worst[: (~nonempty).sum()]]
            if np.array_equal(new, centers):
                break
            centers = new
        d2 = _sq_dist(points, centers)
        labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(len(points)), labels].sum())
        if best is None or inertia < best[2]:
            best = (centers, labels, inertia)
    return best


@dataclass(frozen=True)
class ClusterSet:
    k: int
    centers: np.ndarray          # metres in the local plane
    labels: np.ndarray
    max_radius_m: float
    origin: tuple[float, float]
    satisfied: bool

    @property
    def center_latlon(self) -> tuple[np.ndarray, np.ndarray]:
        return unproject(self.centers, self.origin)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def cluster_stationary(lat, lon, radius_threshold_m: float = RADIUS_THRESHOLD_M,
                       k_max: int = 50, seed: int = 0, n_init: int = 10) -> ClusterSet:
    """Grow K from 1 until every point lies within ``radius_threshold_m`` of its center.

    Each K is solved with its own generator derived from (seed, K), so the
    solution for a given K does not depend on the search path.
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if len(lat) == 0:
        raise ValueError("no stationary fixes to cluster")
    origin = (float(lat.mean()), float(lon.mean()))
    pts = project(lat, lon, origin)
    n_distinct = len(np.unique(pts, axis=0))
    result = None
    for k in range(1, min(k_max, n_distinct) + 1):
        rng = np.random.default_rng([seed, k])
        centers, labels, _ = kmeans(pts, k, rng, n_init=n_init)
        radius = float(np.sqrt(((pts - centers[labels]) ** 2).sum(axis=1)).max())
        result = ClusterSet(k, centers, labels, radius, origin, radius < radius_threshold_m)
        if result.satisfied:
            break
    return result


@dataclass(frozen=True)
class SpectralResult:
    frequency: np.ndarray
    energy_latitude: np.ndarray
    energy_longitude: np.ndarray
    e24_latitude: float
    e24_longitude: float
    circadian_movement: float | None
    degenerate: bool = False


def circadian_movement(ts, lat, lon, band_hours: float = 0.5, period_hours: float = 24.0,
                       oversample: float = 4.0, min_period_h: float = 2.0,
                       normalize: bool = True, per_sample: bool = False) -> SpectralResult:
    """Log of the summed latitude and longitude spectral energy in the 24 h band.

    ``ts`` are epoch seconds. Energy is summed over grid frequencies whose period
    lies within ``period_hours`` +/- ``band_hours``. Periodogram peaks grow with
    the number of samples; ``per_sample`` divides energies by it so windows
    scanned at different rates are comparable.
    """
    ts = np.asarray(ts, dtype=float)
    t_h = (ts - ts.min()) / 3600.0 if len(ts) else ts
    span = float(np.ptp(t_h)) if len(t_h) else 0.0
    if len(t_h) < 3 or span < 24.0:
        raise ValueError(f"window too short for circadian movement ({span:.1f} h of fixes)")
    freqs = frequency_grid(span, min_period_h=min_period_h, oversample=oversample)
    p_lat = lomb_scargle(t_h, lat, freqs, normalize=normalize)
    p_lon = lomb_scargle(t_h, lon, freqs, normalize=normalize)
    periods = 1.0 / freqs
    band = (periods >= period_hours - band_hours) & (periods <= period_hours + band_hours)
    e_lat = float(p_lat.power[band].sum())
    e_lon = float(p_lon.power[band].sum())
    if per_sample:
        e_lat, e_lon = e_lat / len(t_h), e_lon / len(t_h)
    total = e_lat + e_lon
    cm = math.log(total) if total > 0 else None
    return SpectralResult(freqs, p_lat.power, p_lon.power, e_lat, e_lon, cm,
                          degenerate=p_lat.degenerate or p_lon.degenerate)


@dataclass
class MobilityFeatures:
    clusters: ClusterSet | None
    n_fixes: int
    n_stationary: int
    weekly_cm: list[tuple[int, float, float | None]]


def mobility_features(events, schedule=None, seed: int = 0, max_gap_minutes: float = 30.0,
                      radius_threshold_m: float = RADIUS_THRESHOLD_M, k_max: int = 50,
                      stationary_only_cm: bool = False, per_sample: bool = False) -> MobilityFeatures:
    """Cluster count over all stationary fixes and circadian movement per schedule week."""
    ts, lat, lon = gps_series(events)
    labeled = estimate_speeds(zip(ts, lat, lon), max_gap_minutes=max_gap_minutes)
    stat = np.array([f.state is State.STATIONARY for f in labeled], dtype=bool)
    clusters = None
    if stat.any():
        clusters = cluster_stationary(lat[stat], lon[stat], radius_threshold_m, k_max, seed)

    weekly = []
    if schedule is not None and schedule.weeks:
        windows = [(w.start, w.end, w.interval_minutes) for w in schedule.weeks]
    elif len(ts):
        t0, windows = int(ts[0]), []
        while t0 <= ts[-1]:
            windows.append((t0, t0 + 7 * 86400, float("nan")))
            t0 += 7 * 86400
    else:
        windows = []
    keep = stat if stationary_only_cm else np.ones(len(ts), dtype=bool)
    for i, (a, b, interval) in enumerate(windows):
        m = keep & (ts >= a) & (ts < b)
        cm = None
        if m.sum() >= 3 and np.ptp(ts[m]) >= 24 * 3600:
            cm = circadian_movement(ts[m], lat[m], lon[m],
                                    per_sample=per_sample).circadian_movement
        weekly.append((i, interval, cm))
    return MobilityFeatures(clusters, len(ts), int(stat.sum()), weekly)
