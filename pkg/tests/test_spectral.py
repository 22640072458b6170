import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from passivesense.spectral import frequency_grid, lomb_scargle

from oracles import dft_periodogram, lstsq_sinusoid_power


def test_regular_sampling_matches_dft():
    rng = np.random.default_rng(0)
    n, dt = 301, 0.25
    t = np.arange(n) * dt
    y = np.sin(2 * np.pi * t / 24) + 0.3 * rng.standard_normal(n)
    k, ref = dft_periodogram(y)
    got = lomb_scargle(t, y, k / (n * dt)).power
    np.testing.assert_allclose(got, ref, rtol=1e-6)


def test_even_length_excludes_nyquist():
    rng = np.random.default_rng(1)
    y = rng.standard_normal(64)
    k, ref = dft_periodogram(y)
    assert k[-1] == 31
    np.testing.assert_allclose(lomb_scargle(np.arange(64.0), y, k / 64).power, ref, rtol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_irregular_matches_least_squares(seed):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 100, 60))
    y = np.cos(2 * np.pi * t / 13 + 1) + rng.standard_normal(60)
    f = np.linspace(0.01, 0.5, 25)
    np.testing.assert_allclose(lomb_scargle(t, y, f).power, lstsq_sinusoid_power(t, y, f), rtol=1e-8)


def test_peak_survives_heavy_deletion():
    rng = np.random.default_rng(2)
    t = np.arange(0, 24 * 7, 0.1)
    keep = rng.random(len(t)) > 0.4
    t = t[keep]
    y = np.sin(2 * np.pi * t / 24) + 0.5 * rng.standard_normal(len(t))
    f = frequency_grid(np.ptp(t))
    p = lomb_scargle(t, y, f)
    assert 1 / f[np.argmax(p.power)] == pytest.approx(24, abs=1.0)


def test_constant_series_is_degenerate():
    p = lomb_scargle(np.arange(10.0), np.full(10, 3.0), [0.1, 0.2])
    assert p.degenerate and not p.power.any()


def test_input_checks():
    with pytest.raises(ValueError):
        lomb_scargle([0, 1], [1, 2], [0.1])
    with pytest.raises(ValueError):
        lomb_scargle([0, 1, 2], [1, 2, 3], [0.0])
    with pytest.raises(ValueError):
        lomb_scargle([1, 1, 1], [1, 2, 3], [0.1])


@settings(max_examples=30)
@given(st.floats(-1e4, 1e4), st.floats(0.1, 100), st.floats(-50, 50), st.integers(0, 1000))
def test_translation_and_affine_invariance(shift, scale, offset, seed):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 72, 40))
    y = rng.standard_normal(40)
    f = np.linspace(0.02, 0.4, 15)
    base = lomb_scargle(t, y, f).power
    np.testing.assert_allclose(lomb_scargle(t + shift, y, f).power, base, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(lomb_scargle(t, scale * y + offset, f).power, base, rtol=1e-6, atol=1e-9)


def test_frequency_grid_bounds():
    f = frequency_grid(168)
    assert f[0] == pytest.approx(1 / 336)
    assert np.allclose(np.diff(f), 1 / 672)
    assert 1 / f[-1] >= 2 - 1e-9
    with pytest.raises(ValueError):
        frequency_grid(0)
