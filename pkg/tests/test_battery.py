import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from passivesense import synth
from passivesense.battery import (
    BatteryFit, bisquare_weights, discharge_observations, fit_battery_model, fit_from_lives,
    irls_bisquare, predict_battery_life,
)
from passivesense.ingest import parse_scan_log
from passivesense.model import StudySchedule, group_by_participant

from conftest import T0, bat


def test_ten_percent_over_two_hours(one_week):
    evs = [bat(T0 + 600 * i, 100 - 10 * i / 12) for i in range(13)]
    (obs,) = discharge_observations(evs, one_week)
    assert obs.discharge_rate == pytest.approx(5.0, rel=1e-12)
    assert obs.hours == pytest.approx(2.0) and obs.n_intervals == 12
    assert obs.scan_rate == 1.0


def test_charging_and_gaps_ignored(one_week):
    evs = [bat(T0, 90), bat(T0 + 600, 89), bat(T0 + 1200, 95, charging=True),
           bat(T0 + 1800, 99, charging=True), bat(T0 + 2400, 98),
           bat(T0 + 2400 + 3600, 80)]  # gap too long
    (obs,) = discharge_observations(evs, one_week)
    assert obs.n_intervals == 1 and obs.discharge_rate == pytest.approx(6.0)


def test_week_spent_charging_is_omitted():
    sched = StudySchedule.four_week(T0, intervals=(8, 5))
    week2 = T0 + 7 * 86400
    evs = [bat(T0 + 600 * i, 100 - i) for i in range(6)]
    evs += [bat(week2 + 600 * i, 50 + i, charging=True) for i in range(6)]
    obs = discharge_observations(evs, sched)
    assert [o.week for o in obs] == [0]


def test_pairs_straddling_weeks_skipped():
    sched = StudySchedule.four_week(T0, intervals=(8, 5))
    edge = T0 + 7 * 86400
    evs = [bat(edge - 300, 50), bat(edge + 300, 40), bat(edge + 900, 39)]
    obs = discharge_observations(evs, sched)
    assert len(obs) == 1 and obs[0].week == 1 and obs[0].discharge_rate == pytest.approx(6.0)


def test_exact_line_recovered():
    x = np.array([0, 7.5, 12, 15, 20])
    fit = irls_bisquare(x, 4.7 + 0.05 * x)
    assert fit.intercept == pytest.approx(4.7, abs=1e-12)
    assert fit.slope == pytest.approx(0.05, abs=1e-12)


def test_exact_line_with_one_outlier():
    x = np.arange(10.0)
    y = 1 + 2 * x
    y[3] = 100
    fit = irls_bisquare(x, y)
    assert fit.slope == pytest.approx(2, abs=1e-9) and fit.weights[3] == 0


def test_near_exact_line_matches_ols():
    rng = np.random.default_rng(0)
    x = np.linspace(0, 20, 30)
    y = 3 + 0.4 * x + rng.standard_normal(30) * 1e-13
    fit = irls_bisquare(x, y)
    ols = np.polyfit(x, y, 1)
    assert fit.slope == pytest.approx(ols[0], abs=1e-9)
    assert fit.intercept == pytest.approx(ols[1], abs=1e-9)


def ols_slope(x, y):
    return np.polyfit(x, y, 1)[0]


def test_outliers_twenty_percent():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = 50
        x = rng.uniform(0, 20, n)
        y = 4.7 + 0.045 * x + rng.normal(0, 0.05, n)
        bad = rng.choice(n, n // 5, replace=False)
        y[bad] += rng.choice([-1, 1], len(bad)) * rng.uniform(3, 10, len(bad))
        clean = np.setdiff1d(np.arange(n), bad)
        ref = ols_slope(x[clean], y[clean])
        assert abs(irls_bisquare(x, y).slope - ref) <= 0.02 * abs(ref), seed


def test_bisquare_weight_shape():
    w = bisquare_weights(np.array([0.0, 4.685, -10.0, 2.0]), 1.0)
    assert w[0] == 1 and w[1] == 0 and w[2] == 0 and 0 < w[3] < 1


def test_reference_lives_round_trip():
    fit = fit_from_lives([(0, 21.3), (12, 18.8)])
    assert predict_battery_life(fit, 0) == pytest.approx(21.3, abs=1e-9)
    assert predict_battery_life(fit, 12) == pytest.approx(18.8, abs=1e-9)
    life20 = predict_battery_life(fit, 20)
    assert life20 == pytest.approx(17.44, abs=0.01)
    assert 21.3 - 18.8 == pytest.approx(2.5)
    assert (21.3 - 18.8) / 21.3 == pytest.approx(0.117, abs=5e-4)


def test_constant_rate_life():
    fit = BatteryFit(5.0, 0.0, np.ones(2), 1)
    assert predict_battery_life(fit, 0) == 20 and predict_battery_life(fit, 20) == 20
    with pytest.raises(ValueError):
        predict_battery_life(BatteryFit(-1.0, 0.0, np.ones(2), 1), 0)


@settings(max_examples=40)
@given(st.floats(1, 10), st.floats(0.001, 0.3))
def test_life_decreases_with_scan_rate(c0, k):
    fit = BatteryFit(c0, k, np.ones(2), 1)
    lives = [predict_battery_life(fit, r) for r in (0, 7.5, 12, 15, 20)]
    assert all(a > b for a, b in zip(lives, lives[1:]))


def test_needs_two_scan_rates():
    with pytest.raises(ValueError):
        fit_from_lives([(5, 20), (5, 19)])


def test_synthetic_cohort_recovers_cost():
    cfg = synth.SynthConfig(seed=5, n_participants=6, battery_noise=0.0)
    lines, manifest = synth.generate(cfg)
    events, _ = parse_scan_log(lines)
    obs = []
    for pid, evs in group_by_participant(events).items():
        obs += discharge_observations(evs, cfg.schedule)
    fit = fit_battery_model(obs)
    assert fit.intercept == pytest.approx(100 / 21.3, abs=0.1)
    assert predict_battery_life(fit, 20) == pytest.approx(17.44, abs=0.3)
