"""Lomb-Scargle least-squares spectral analysis for irregularly sampled series.

Times are in hours and frequencies in cycles per hour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Periodogram:
    frequency: np.ndarray
    power: np.ndarray
    degenerate: bool = False


def frequency_grid(span_hours: float, min_period_h: float = 2.0,
                   oversample: float = 4.0) -> np.ndarray:
    """Periods from ``min_period_h`` to twice the span, spaced 1/(oversample*span)."""
    if span_hours <= 0:
        raise ValueError("span must be positive")
    df = 1.0 / (oversample * span_hours)
    f_lo = 1.0 / (2.0 * span_hours)
    f_hi = 1.0 / min_period_h
    n = int(np.floor((f_hi - f_lo) / df + 1e-9)) + 1
    return f_lo + df * np.arange(max(n, 0))


def lomb_scargle(t, y, freqs, normalize: bool = True) -> Periodogram:
    """Classical Lomb-Scargle periodogram.

    With ``normalize`` the power is divided by twice the sample variance
    (ddof=1), otherwise it is the raw half sum of squared projections.
    A constant series returns zeros with ``degenerate`` set.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if len(t) < 3:
        raise ValueError("need at least 3 samples")
    if np.ptp(t) == 0:
        raise ValueError("timestamps are all equal")
    if np.any(freqs <= 0):
        raise ValueError("frequencies must be positive")

    yc = y - y.mean()
    var = yc.var(ddof=1)
    if var == 0:
        return Periodogram(freqs, np.zeros_like(freqs), degenerate=True)

    tt = t - t.min()
    wt = np.outer(2.0 * np.pi * freqs, tt)
    c, s = np.cos(wt), np.sin(wt)
    cc, ss, cs = (c * c).sum(axis=1), (s * s).sum(axis=1), (c * s).sum(axis=1)
    # tan(2 w tau) = sum sin(2wt) / sum cos(2wt)
    two_wtau = np.arctan2(2.0 * cs, cc - ss)
    ct, st = np.cos(two_wtau / 2.0), np.sin(two_wtau / 2.0)
    yc_c, yc_s = c @ yc, s @ yc
    # expand cos/sin of w(t - tau) with angle-sum identities
    proj_c = ct * yc_c + st * yc_s
    proj_s = ct * yc_s - st * yc_c
    norm_c = ct * ct * cc + 2.0 * ct * st * cs + st * st * ss
    norm_s = ct * ct * ss - 2.0 * ct * st * cs + st * st * cc
    power = 0.5 * (proj_c ** 2 / norm_c + proj_s ** 2 / norm_s)
    if normalize:
        power = power / var
    return Periodogram(freqs, power)
