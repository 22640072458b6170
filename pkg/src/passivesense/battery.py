"""Battery cost of scanning: discharge rates, robust rate-vs-scan-rate fit, battery life."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BatterySample, ScanKind, StudySchedule

BISQUARE_C = 4.685
MAD_TO_SIGMA = 1.4826
REPORT_SCAN_RATES = (0.0, 7.5, 12.0, 15.0, 20.0)


@dataclass(frozen=True)
class DischargeObservation:
    device_id: str
    week: int
    scan_rate: float
    discharge_rate: float
    n_intervals: int
    hours: float


def discharge_observations(events, schedule: StudySchedule, device_id: str | None = None,
                           max_gap_minutes: float = 30.0) -> list[DischargeObservation]:
    """One discharge rate (%/h) per schedule week.

    Only consecutive sample pairs that are both discharging, within the same
    week, at most ``max_gap_minutes`` apart and not increasing in level count.
    Weeks without any net drop are omitted.
    """
    samples = sorted(((e.timestamp, e.payload) for e in events if e.kind is ScanKind.BATTERY),
                     key=lambda s: s[0])
    if device_id is None:
        device_id = next((e.participant_id for e in events), "")
    drop = np.zeros(len(schedule.weeks))
    hours = np.zeros(len(schedule.weeks))
    count = np.zeros(len(schedule.weeks), dtype=int)
    for (t0, a), (t1, b) in zip(samples, samples[1:]):
        a: BatterySample
        if a.charging or b.charging or t1 <= t0 or t1 - t0 > max_gap_minutes * 60:
            continue
        if b.level_pct > a.level_pct:
            continue
        w0, w1 = schedule.week_index(t0), schedule.week_index(t1)
        if w0 is None or w0 != w1:
            continue
        drop[w0] += a.level_pct - b.level_pct
        hours[w0] += (t1 - t0) / 3600.0
        count[w0] += 1
    out = []
    for i, w in enumerate(schedule.weeks):
        if count[i] and drop[i] > 0:
            out.append(DischargeObservation(device_id, i, w.scans_per_hour,
                                            drop[i] / hours[i], int(count[i]), float(hours[i])))
    return out


@dataclass(frozen=True)
class RobustLine:
    intercept: float
    slope: float
    weights: np.ndarray
    iterations: int
    scale: float
    degenerate: bool = False


def _wls(x, y, w):
    X = np.column_stack([np.ones_like(x), x])
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    return beta


def bisquare_weights(r, scale, c: float = BISQUARE_C):
    u = np.asarray(r) / (c * scale)
    return np.where(np.abs(u) < 1, (1 - u * u) ** 2, 0.0)


def irls_bisquare(x, y, c: float = BISQUARE_C, tol: float = 1e-6,
                  max_iter: int = 50) -> RobustLine:
    """Straight-line fit by iteratively reweighted least squares with Tukey's bisquare.

    Starts from OLS; the residual scale is 1.4826 x the median absolute residual
    (residuals are deviations from the fitted line, so they are not re-centered). Stops when
    no weight changes by more than ``tol``. If every weight collapses to zero the
    OLS line is returned with ``degenerate`` set.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(x)) < 2:
        raise ValueError("need at least two distinct x values")
    ols = _wls(x, y, np.ones_like(x))
    beta = ols
    w = np.ones_like(x)
    yscale = max(1.0, float(np.abs(y).max()))
    it, s = 0, 0.0
    for it in range(1, max_iter + 1):
        r = y - (beta[0] + beta[1] * x)
        s = MAD_TO_SIGMA * float(np.median(np.abs(r)))
        if s <= 1e-12 * yscale:
            # most residuals vanish at machine precision: the current line is exact
            w = (np.abs(r) <= 1e-9 * yscale).astype(float)
            break
        w_new = bisquare_weights(r, s, c)
        if not np.any(w_new > 0):
            return RobustLine(float(ols[0]), float(ols[1]), np.ones_like(x), it, s, True)
        converged = np.max(np.abs(w_new - w)) < tol
        w = w_new
        beta = _wls(x, y, w)
        if converged:
            break
    return RobustLine(float(beta[0]), float(beta[1]), w, it, s)


@dataclass(frozen=True)
class BatteryFit:
    """Discharge rate (%/h) = intercept + slope * scans/hour."""

    intercept: float
    slope: float
    weights: np.ndarray
    iterations: int
    degenerate: bool = False

    def rate(self, scan_rate) -> float:
        return self.intercept + self.slope * scan_rate


def fit_battery_model(observations) -> BatteryFit:
    x = np.array([o.scan_rate for o in observations], dtype=float)
    y = np.array([o.discharge_rate for o in observations], dtype=float)
    if len(np.unique(x)) < 2:
        raise ValueError("need observations at two or more distinct scan rates")
    line = irls_bisquare(x, y)
    return BatteryFit(line.intercept, line.slope, line.weights, line.iterations, line.degenerate)


def predict_battery_life(fit: BatteryFit, scan_rate: float) -> float:
    """Hours from full charge to empty: 100 / fitted rate."""
    rate = fit.rate(scan_rate)
    if rate <= 0:
        raise ValueError(f"fitted discharge rate is non-positive at {scan_rate} scans/h")
    return 100.0 / rate


def fit_from_lives(points) -> BatteryFit:
    """Fit the rate-space line through (scan_rate, battery_life_hours) pairs."""
    obs = [DischargeObservation("", i, float(r), 100.0 / float(h), 1, float(h))
           for i, (r, h) in enumerate(points)]
    return fit_battery_model(obs)
