"""Reliability and inference statistics: Cronbach alpha, RM-ANOVA, t-tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.stats import f as f_dist


@dataclass(frozen=True)
class RepeatedMeasures:
    """n subjects x k conditions, complete cases only."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("repeated measures must be a 2-D table")
        if not np.all(np.isfinite(v)):
            raise ValueError("missing cells; build with RepeatedMeasures.from_rows")
        if v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError(f"need n >= 2 subjects and k >= 2 conditions, got {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_rows(cls, rows) -> "RepeatedMeasures":
        """Listwise deletion: rows containing None/NaN are dropped."""
        clean = []
        for r in rows:
            vals = [np.nan if x is None else float(x) for x in r]
            if all(math.isfinite(x) for x in vals):
                clean.append(vals)
        return cls(np.array(clean, dtype=float).reshape(len(clean), -1) if clean
                   else np.empty((0, 0)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


def _as_rm(m) -> RepeatedMeasures:
    return m if isinstance(m, RepeatedMeasures) else RepeatedMeasures(np.asarray(m, dtype=float))


def f_sf(F: float, df1: float, df2: float) -> float:
    """Upper tail P(X > F) for X ~ F(df1, df2) via the regularized incomplete beta."""
    if F <= 0:
        return 1.0
    if math.isinf(F):
        return 0.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * F)))


def t_sf2(t: float, df: float) -> float:
    """Two-sided p-value for Student t."""
    if math.isinf(t):
        return 0.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    ci: tuple[float, float] | None
    n: int
    k: int


def feldt_interval(alpha: float, n: int, k: int, level: float = 0.95) -> tuple[float, float]:
    df1, df2 = n - 1, (n - 1) * (k - 1)
    g = (1 - level) / 2
    lo = 1 - (1 - alpha) * f_dist.ppf(1 - g, df1, df2)
    hi = 1 - (1 - alpha) * f_dist.ppf(g, df1, df2)
    return float(lo), float(hi)


def cronbach_alpha(m, ci_level: float | None = 0.95) -> AlphaResult:
    x = _as_rm(m).values
    n, k = x.shape
    total_var = x.sum(axis=1).var(ddof=1)
    if total_var == 0:
        raise ValueError("zero variance of row sums")
    alpha = k / (k - 1) * (1 - x.var(axis=0, ddof=1).sum() / total_var)
    ci = feldt_interval(alpha, n, k, ci_level) if ci_level else None
    return AlphaResult(float(alpha), ci, n, k)


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df1: float
    df2: float
    p: float
    epsilon: float
    ss_condition: float
    ss_error: float


def greenhouse_geisser_epsilon(x: np.ndarray) -> float:
    k = x.shape[1]
    S = np.cov(x, rowvar=False)
    C = np.eye(k) - np.full((k, k), 1.0 / k)
    Sc = C @ S @ C
    denom = (k - 1) * np.trace(Sc @ Sc)
    if np.trace(Sc) <= 1e-12 * max(np.trace(S), 1e-300) or denom <= 0:
        # no within-subject variation left to test
        return 1.0
    return float(min(1.0, np.trace(Sc) ** 2 / denom))


def rm_anova(m, correction: str = "none") -> AnovaResult:
    """One-way within-subjects ANOVA; ``correction`` is 'none' or 'greenhouse_geisser'."""
    if correction not in ("none", "greenhouse_geisser"):
        raise ValueError(f"unknown correction {correction!r}")
    x = _as_rm(m).values
    n, k = x.shape
    grand = x.mean()
    ss_cond = n * ((x.mean(axis=0) - grand) ** 2).sum()
    ss_subj = k * ((x.mean(axis=1) - grand) ** 2).sum()
    ss_err = ((x - grand) ** 2).sum() - ss_cond - ss_subj
    df1, df2 = k - 1, (k - 1) * (n - 1)
    eps = greenhouse_geisser_epsilon(x)
    scale = x.std() or 1.0
    if ss_cond <= 1e-24 * scale * scale * x.size:
        F = 0.0
    else:
        ms_err = ss_err / df2
        if ms_err <= 1e-24 * scale * scale:
            raise ValueError("zero error mean square")
        F = (ss_cond / df1) / ms_err
    if correction == "greenhouse_geisser":
        df1, df2 = df1 * eps, df2 * eps
    return AnovaResult(float(F), float(df1), float(df2), f_sf(F, df1, df2), eps,
                       float(ss_cond), float(ss_err))


@dataclass(frozen=True)
class TResult:
    t: float
    df: float
    p: float
    d: float | None = None


def paired_t(x, y) -> TResult:
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if d.ndim != 1 or len(d) < 2:
        raise ValueError("paired t-test needs two equal-length samples of length >= 2")
    if np.all(d == 0):
        return TResult(0.0, len(d) - 1, 1.0)
    sd = d.std(ddof=1)
    if sd == 0:
        raise ValueError("zero-variance differences")
    t = d.mean() / (sd / math.sqrt(len(d)))
    return TResult(float(t), len(d) - 1, t_sf2(t, len(d) - 1))


def two_sample_t(x, y, welch: bool = False) -> TResult:
    """Student (pooled) or Welch t-test; ``d`` is Cohen's d with the pooled SD."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = len(x), len(y)
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs length >= 2")
    v1, v2 = x.var(ddof=1), y.var(ddof=1)
    pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    if pooled == 0:
        raise ValueError("zero pooled variance")
    diff = x.mean() - y.mean()
    d = diff / math.sqrt(pooled)
    if welch:
        se2 = v1 / n1 + v2 / n2
        t = diff / math.sqrt(se2)
        df = se2 ** 2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    else:
        t = diff / math.sqrt(pooled * (1 / n1 + 1 / n2))
        df = n1 + n2 - 2
    return TResult(float(t), float(df), t_sf2(t, df), float(d))
