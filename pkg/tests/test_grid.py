import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peakonlab.grid import (
    BlownUpStateError,
    ComplexPair,
    Grid,
    GridFunction,
    InvalidParameterError,
    complex_pair_norm_sandwich,
    from_fine,
    lp_norm,
    spectral_derivative,
    spectral_energy,
    to_fine,
)

from helpers import random_band_limited


@pytest.mark.parametrize("n", [0, 4, 12, 100, 1000])
def test_grid_rejects_bad_point_count(n):
    with pytest.raises(InvalidParameterError):
        Grid(1.0, n)


@pytest.mark.parametrize("L", [0.0, -1.0, math.inf, math.nan])
def test_grid_rejects_bad_length(L):
    with pytest.raises(InvalidParameterError):
        Grid(L, 16)


def test_grid_layout():
    g = Grid(3.0, 16)
    assert g.dx * g.N == pytest.approx(2 * g.L, rel=1e-15)
    assert g.x[0] == -3.0
    np.testing.assert_allclose(np.diff(g.x), g.dx)
    assert g.k[1] == pytest.approx(math.pi / 3.0)
    assert g.k[8] == pytest.approx(-8 * math.pi / 3.0)
    np.testing.assert_array_equal(g.mode_index[:3], [0, 1, 2])
    assert g.mode_index[-1] == -1


def test_grid_function_shape_and_immutability():
    g = Grid(1.0, 8)
    with pytest.raises(InvalidParameterError):
        GridFunction(g, np.zeros(7))
    f = GridFunction(g, np.arange(8.0))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_non_finite_samples_flag_blow_up():
    g = Grid(1.0, 8)
    vals = np.zeros(8, complex)
    vals[3] = np.nan
    f = GridFunction(g, vals)
    assert f.blown_up
    with pytest.raises(BlownUpStateError):
        lp_norm(f, 2)
    with pytest.raises(BlownUpStateError):
        spectral_derivative(f)


@pytest.mark.parametrize("p", [1, 2, 3.5, np.inf])
def test_lp_norm_of_zero(p):
    assert lp_norm(GridFunction(Grid(2.0, 32), np.zeros(32)), p) == 0.0


def test_lp_norm_of_constant_on_pi_grid():
    g = Grid(math.pi, 64)
    assert lp_norm(GridFunction(g, np.ones(64)), 1) == pytest.approx(2 * math.pi, rel=1e-15)


def test_lp_norm_rejects_p_below_one():
    with pytest.raises(InvalidParameterError):
        lp_norm(GridFunction(Grid(1.0, 8), np.ones(8)), 0.5)


def test_lp_norm_large_p_does_not_overflow():
    g = Grid(1.0, 16)
    f = GridFunction(g, 1e200 * np.ones(16))
    assert lp_norm(f, 7) == pytest.approx(1e200 * 2.0 ** (1 / 7), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(-10, 10), p=st.sampled_from([1.0, 2.0, np.inf]), seed=st.integers(0, 2**31))
def test_lp_norm_gauge_invariant_within_4_ulps(alpha, p, seed):
    rng = np.random.default_rng(seed)
    g = Grid(5.0, 64)
    f = GridFunction(g, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    a = lp_norm(f.scaled(np.exp(1j * alpha)), p)
    b = lp_norm(f, p)
    assert abs(a - b) <= 4 * np.spacing(b)


def test_parseval(rng):
    g = Grid(7.0, 256)
    f = GridFunction(g, rng.standard_normal(256) + 1j * rng.standard_normal(256))
    assert spectral_energy(f) == pytest.approx(lp_norm(f, 2) ** 2, rel=1e-12)


def test_derivative_of_constant_is_zero():
    g = Grid(2.0, 64)
    assert np.max(np.abs(spectral_derivative(GridFunction(g, 3 + 2j * np.ones(64))).values)) < 1e-13


def test_derivative_of_lowest_mode():
    g = Grid(2.0, 64)
    k1 = math.pi / g.L
    f = GridFunction(g, np.exp(1j * k1 * g.x))
    np.testing.assert_allclose(spectral_derivative(f).values, 1j * k1 * f.values, atol=1e-14)


def test_derivative_of_sine_matches_analytic():
    g = Grid(5.0, 256)
    w = 3 * math.pi / g.L
    d = spectral_derivative(GridFunction(g, np.sin(w * g.x)))
    assert np.max(np.abs(d.values - w * np.cos(w * g.x))) <= 1e-12


def test_second_derivative_equals_minus_k_squared(rng):
    g = Grid(4.0, 128)
    f = random_band_limited(g, rng, modes=20)
    twice = spectral_derivative(spectral_derivative(f))
    direct = spectral_derivative(f, order=2)
    scale = np.max(np.abs(direct.values))
    assert np.max(np.abs(twice.values - direct.values)) <= 1e-13 * scale


def test_complex_pair_round_trip(rng):
    g = Grid(1.0, 32)
    f = GridFunction(g, rng.standard_normal(32) + 1j * rng.standard_normal(32))
    np.testing.assert_array_equal(ComplexPair.from_function(f).combine(g).values, f.values)


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_sandwich_real_case(p, rng):
    f1 = rng.standard_normal(50)
    lo, mid, hi = complex_pair_norm_sandwich(f1, np.zeros(50), p, 0.1)
    assert mid == pytest.approx(hi)
    assert lo == pytest.approx(0.5 * hi)


@pytest.mark.parametrize("p", [1, 2, 3, np.inf])
def test_sandwich_equal_parts(p):
    x = np.linspace(-5, 5, 200)
    g = np.exp(-x * x)
    lo, mid, hi = complex_pair_norm_sandwich(g, g, p, x[1] - x[0])
    assert lo <= mid <= hi
    assert hi == pytest.approx(2 * lo)
    # |g + i g| = sqrt(2)|g| pointwise, so the middle term is sqrt(2)||g|| for every p
    assert mid == pytest.approx(math.sqrt(2) * lo, rel=1e-13)


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_sandwich_on_random_pairs(p, rng):
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        complex_pair_norm_sandwich(rng.standard_normal(n) * rng.exponential(),
                                   rng.standard_normal(n) * rng.exponential(), p)


def test_sandwich_length_mismatch():
    with pytest.raises(InvalidParameterError):
        complex_pair_norm_sandwich(np.ones(3), np.ones(4), 2)


def test_padding_round_trip(rng):
    g = Grid(3.0, 64)
    f = random_band_limited(g, rng, modes=20)
    back = from_fine(to_fine(f.hat(), 96), 64)
    np.testing.assert_allclose(back, f.hat(), atol=1e-12 * np.max(np.abs(f.hat())))
