import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from passivesense.stats import (
    RepeatedMeasures, cronbach_alpha, f_sf, feldt_interval, greenhouse_geisser_epsilon,
    paired_t, rm_anova, t_sf2, two_sample_t,
)

from oracles import anova_ss_bruteforce, f_tail_quad

TABLE = [[1, 2, 3], [2, 4, 5], [3, 3, 6], [4, 6, 6], [2, 5, 7]]
TABLE_F = 16.487804878048788  # frozen from anova_ss_bruteforce(TABLE)


def test_frozen_table_value():
    assert anova_ss_bruteforce(TABLE) == pytest.approx(TABLE_F, rel=1e-14)
    assert rm_anova(TABLE).F == pytest.approx(TABLE_F, rel=1e-10)


@settings(max_examples=50)
@given(st.integers(2, 8), st.integers(2, 5), st.integers(0, 10_000))
def test_anova_matches_bruteforce(n, k, seed):
    x = np.random.default_rng(seed).normal(size=(n, k)) + np.arange(k) * 0.3
    assert rm_anova(x).F == pytest.approx(anova_ss_bruteforce(x.tolist()), rel=1e-9)


GRID = [(F, d1, d2) for F in (0.2, 1.0, 2.31, 5.0, 12.0) for d1, d2 in ((1, 5), (3, 69), (2, 24), (4, 12))]


@pytest.mark.parametrize("F,d1,d2", GRID)
def test_f_tail_matches_integration(F, d1, d2):
    assert f_sf(F, d1, d2) == pytest.approx(f_tail_quad(F, d1, d2), abs=1e-8)


def test_reference_p_values():
    assert round(f_sf(2.31, 3, 69), 2) == 0.08
    assert round(f_sf(2.09, 2, 24), 2) == 0.15
    assert t_sf2(-1.33, 26) == pytest.approx(0.19, abs=0.006)
    assert round(t_sf2(-3.99, 12), 3) == 0.002


def test_paired_hand_example():
    r = paired_t([1, 2, 3, 4], [0, 0, 0, 0])
    assert r.t == pytest.approx(3.873, abs=1e-3) and r.df == 3


def test_two_sample_hand_example():
    r = two_sample_t([1, 2, 3], [4, 5, 6])
    # means 2 and 5, both variances 1, pooled SE sqrt(2/3)
    assert r.t == pytest.approx(-3 / math.sqrt(2 / 3), rel=1e-12) and r.df == 4
    assert abs(r.t) == pytest.approx(3.674, abs=1e-3)
    assert r.d == pytest.approx(-3.0)


def test_welch_equals_student_for_balanced_equal_variance():
    s = two_sample_t([1, 2, 3, 4], [2, 3, 4, 5])
    w = two_sample_t([1, 2, 3, 4], [2, 3, 4, 5], welch=True)
    assert w.t == pytest.approx(s.t) and w.df == pytest.approx(s.df)


def test_welch_df_shrinks_with_unequal_variance():
    w = two_sample_t([1, 1.1, 0.9, 1.05], [0, 10, -10, 5, -5, 8], welch=True)
    assert w.df < 8


def test_cohens_d_monte_carlo():
    rng = np.random.default_rng(0)
    ds = [two_sample_t(rng.normal(1, 1, 200), rng.normal(0, 1, 200)).d for _ in range(200)]
    assert np.mean(ds) == pytest.approx(1.0, abs=0.03)


def test_t_p_under_null_is_uniform():
    rng = np.random.default_rng(1)
    ps = [paired_t(rng.normal(size=10), rng.normal(size=10)).p for _ in range(2000)]
    assert np.mean(np.array(ps) < 0.05) == pytest.approx(0.05, abs=0.015)


def test_zero_differences():
    r = paired_t([1, 2, 3], [1, 2, 3])
    assert r.t == 0 and r.p == 1
    with pytest.raises(ValueError):
        paired_t([1, 2, 3], [0, 1, 2])
    with pytest.raises(ValueError):
        two_sample_t([1, 1], [1, 1])


def test_identical_columns_alpha_one():
    x = np.random.default_rng(2).normal(size=(10, 1)) * np.ones((1, 4))
    assert cronbach_alpha(x).alpha == pytest.approx(1.0, abs=1e-12)


def test_noise_alpha_near_zero():
    rng = np.random.default_rng(3)
    alphas = [cronbach_alpha(rng.normal(size=(50, 4)), None).alpha for _ in range(200)]
    assert abs(np.mean(alphas)) < 0.05


def test_feldt_interval():
    lo, hi = feldt_interval(0.79, 24, 4)
    assert lo == pytest.approx(0.61, abs=0.01) and hi == pytest.approx(0.89, abs=0.015)
    r = cronbach_alpha(np.random.default_rng(4).normal(size=(24, 4)) + np.arange(24)[:, None] * 0.1)
    assert r.ci[0] < r.alpha < r.ci[1]


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.floats(0.1, 100), st.floats(-100, 100))
def test_invariances(seed, scale, shift):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(12, 4)) + rng.normal(size=(12, 1)) * 2
    a, f = cronbach_alpha(x, None).alpha, rm_anova(x).F
    y = x * scale + shift
    assert cronbach_alpha(y, None).alpha == pytest.approx(a, rel=1e-8, abs=1e-10)
    assert rm_anova(y).F == pytest.approx(f, rel=1e-8)
    perm = rng.permutation(12)
    assert rm_anova(x[perm]).F == pytest.approx(f, rel=1e-10)
    assert cronbach_alpha(x[:, ::-1], None).alpha == pytest.approx(a, rel=1e-10)


@settings(max_examples=50)
@given(st.integers(2, 10), st.integers(2, 6), st.integers(0, 10_000))
def test_gg_epsilon_bounds(n, k, seed):
    x = np.random.default_rng(seed).normal(size=(n, k))
    eps = greenhouse_geisser_epsilon(x)
    assert 1 / (k - 1) - 1e-12 <= eps <= 1.0
    gg = rm_anova(x + np.arange(k), "greenhouse_geisser")
    plain = rm_anova(x + np.arange(k))
    assert gg.df1 == pytest.approx(plain.df1 * eps) and gg.df2 == pytest.approx(plain.df2 * eps)
    assert gg.F == plain.F


def test_gg_epsilon_one_for_two_conditions():
    x = np.random.default_rng(5).normal(size=(8, 2))
    assert greenhouse_geisser_epsilon(x) == pytest.approx(1.0)


def test_equal_condition_means():
    x = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [5.0, 5.0, 5.0]])
    r = rm_anova(x)
    assert r.F == 0 and r.p == 1 and r.epsilon == 1


def test_listwise_deletion():
    rm = RepeatedMeasures.from_rows([[1, 2, 3], [2, None, 4], [3, 4, 6], [2, 2, float("nan")]])
    assert rm.n == 2 and rm.k == 3
    with pytest.raises(ValueError):
        rm_anova([[1, 2, 3]])
    with pytest.raises(ValueError):
        rm_anova(TABLE, correction="huynh")
