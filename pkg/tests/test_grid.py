import math

import numpy as np
import pytest

from isidec.channel import convolve, generate_codebook, transmit
from isidec.errors import DegenerateInputError, DomainError, UsageError
from isidec.grid import (ParamGrid, default_grid, estimate_isi_type, is_conditionally_typical,
                         residual_correlations, shift_statistics)
from isidec.spectral import ChannelParams

from oracles import brute_force_taps, objective, shift_matrix


@pytest.mark.parametrize("n, gamma, isi_len, tap_bound", [
    (256, 0.25, 8, 256 ** (1 / 16)),
    (65536, 0.0625, 16, 2.0),
    (16, 0.5, 4, 16 ** (1 / 16)),
])
def test_default_grid_schedule(n, gamma, isi_len, tap_bound):
    g = default_grid(n)
    assert g.gamma == pytest.approx(gamma)
    assert g.isi_len == isi_len
    assert g.tap_bound == pytest.approx(tap_bound)
    assert g.sigma2_min == 0.25
    assert g.sigma2_max == pytest.approx(tap_bound**2)
    assert math.isfinite(g.cardinality)


def test_default_grid_overrides_and_validation():
    g = default_grid(1024, isi_len=2, gamma=None, sigma2_min=0.1)
    assert g.isi_len == 2 and g.sigma2_min == 0.1 and g.gamma == pytest.approx(1024 ** -0.25)
    with pytest.raises(DomainError):
        default_grid(8)
    with pytest.raises(DomainError):
        ParamGrid(gamma=0.1, tap_bound=1, isi_len=0, sigma2_min=2, sigma2_max=1)


def test_max_index_excludes_bound():
    # 65536: tap_bound / gamma == 32 exactly, and |tap| < tap_bound is strict
    assert default_grid(65536).max_index == 31
    assert default_grid(256).max_index == 5


def test_shift_statistics_match_explicit_matrix():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=50), rng.normal(size=53)
    G, b, yy = shift_statistics(x, y, 3)
    X = shift_matrix(x, 3)
    np.testing.assert_allclose(G, X.T @ X, atol=1e-12)
    np.testing.assert_allclose(b, X.T @ y, atol=1e-12)
    h = rng.normal(size=4)
    assert yy - 2 * h @ b + h @ G @ h == pytest.approx(objective(x, y, h), rel=1e-12)


def test_noiseless_on_grid_recovery():
    grid = default_grid(1024, isi_len=2)
    x = generate_codebook(1, 1024, 31)[0]
    h = np.array([4, -2, 1]) * grid.gamma
    t = estimate_isi_type(x, convolve(h, x), grid)
    np.testing.assert_array_equal(t.h_hat, h)
    np.testing.assert_array_equal(brute_force_taps(x, convolve(h, x), grid)[0], h)
    assert t.sigma2_hat == grid.sigma2_min
    assert t.residual_power < 1e-20


def test_pure_noise_estimate():
    n = 4096
    grid = default_grid(n, isi_len=2)
    for seed in range(5):
        x = generate_codebook(1, n, seed)[0]
        y = transmit(x, ChannelParams((0, 0, 0), 1.0), seed).y
        t = estimate_isi_type(x, y, grid)
        h_bf, _ = brute_force_taps(x, y, grid)
        np.testing.assert_array_equal(t.h_hat, h_bf)
        assert np.max(np.abs(t.h_hat)) <= 2 * grid.gamma
        assert abs(t.sigma2_hat - 1) <= 2 * grid.gamma


def test_on_grid_truth_recovery_rate():
    n = 4096
    grid = default_grid(n, isi_len=2)
    truth = ChannelParams(np.array([6, 3, -2]) * grid.gamma, 1.0)
    hits = agree = 0
    for seed in range(100):
        x = generate_codebook(1, n, 1000 + seed)[0]
        y = transmit(x, truth, seed).y
        t = estimate_isi_type(x, y, grid)
        hits += np.max(np.abs(t.h_hat - truth.taps)) <= grid.gamma + 1e-12
        agree += np.array_equal(t.h_hat, brute_force_taps(x, y, grid)[0])
    assert hits >= 95
    assert agree >= 99


def test_local_search_is_certified():
    # No single-coordinate grid neighbour has a strictly smaller residual.
    grid = default_grid(512, isi_len=3)
    rng = np.random.default_rng(1)
    for seed in range(20):
        x = generate_codebook(1, 512, seed)[0]
        y = transmit(x, ChannelParams(rng.uniform(-1, 1, 4), 0.5), seed).y
        t = estimate_isi_type(x, y, grid)
        base = objective(x, y, t.h_hat)
        for i in range(4):
            for step in (-1, 1):
                nb = t.h_hat.copy()
                nb[i] += step * grid.gamma
                if abs(nb[i]) < grid.tap_bound:
                    assert objective(x, y, nb) >= base - 1e-9


def test_out_of_range_truth_is_clamped_outage():
    grid = default_grid(1024, isi_len=1)
    x = generate_codebook(1, 1024, 2)[0]
    y = transmit(x, ChannelParams((3.0, 0.2), 1.0), 2).y
    t = estimate_isi_type(x, y, grid)
    assert t.h_hat[0] == grid.max_index * grid.gamma
    assert t.clamped and not t.interior


def test_degenerate_input():
    grid = default_grid(64, isi_len=1)
    with pytest.raises(DegenerateInputError):
        estimate_isi_type(np.zeros(64), np.ones(65), grid)
    with pytest.raises(UsageError):
        estimate_isi_type(np.ones(64), np.ones(64), grid)


def test_sigma2_rounding_and_clamping():
    grid = ParamGrid(gamma=0.25, tap_bound=2, isi_len=0, sigma2_min=0.25, sigma2_max=2)
    assert grid.round_sigma2(0.0) == 0.25
    assert grid.round_sigma2(0.62) == 0.5
    assert grid.round_sigma2(0.625) == 0.75  # half away from zero
    assert grid.round_sigma2(9.0) == 2


def test_residual_correlations_vanish_at_least_squares():
    x = generate_codebook(1, 2048, 5)[0]
    y = transmit(x, ChannelParams((0.7, -0.4, 0.2), 1.0), 5).y
    X = shift_matrix(x, 2)
    h_ls = np.linalg.lstsq(X, y, rcond=None)[0]
    assert np.all(np.abs(residual_correlations(x, y, h_ls)) < 1e-10)


def test_residual_correlations_below_gamma_and_perturbation():
    n = 4096
    grid = default_grid(n, isi_len=2)
    truth = ChannelParams((0.9, 0.3, -0.5), 1.0)
    for seed in range(100):
        x = generate_codebook(1, n, seed)[0]
        y = transmit(x, truth, seed).y
        t = estimate_isi_type(x, y, grid)
        c = residual_correlations(x, y, t.h_hat)
        assert np.all(np.abs(c) < grid.gamma)
        if seed < 10:
            bumped = t.h_hat.copy()
            bumped[1] += 10 * grid.gamma
            assert abs(residual_correlations(x, y, bumped)[1]) > grid.gamma


def test_typicality_examples():
    n = 1000
    grid = default_grid(n, isi_len=1)
    p = ChannelParams((1.0, 0.5), 0.8)
    x = generate_codebook(1, n, 3)[0]
    z = np.random.default_rng(0).normal(size=n + 1)
    z *= math.sqrt(n * p.sigma2 / (z @ z))  # ||z||^2 / n == sigma2 exactly
    assert is_conditionally_typical(x, convolve(p.h, x) + z, p, grid)
    assert not is_conditionally_typical(x, convolve(p.h, x), ChannelParams(p.h, 1.0), grid)


def test_typicality_of_transmissions():
    n = 4096
    grid = default_grid(n, isi_len=1)
    p = ChannelParams((1.0, -0.4), 0.9)
    hits = sum(is_conditionally_typical(x, transmit(x, p, s).y, p, grid)
               for s, x in enumerate(generate_codebook(100, n, 77).words))
    assert hits >= 99


def test_interior_implies_typical():
    n = 4096
    grid = default_grid(n, isi_len=2)
    rng = np.random.default_rng(21)
    for s in range(30):
        truth = ChannelParams(rng.uniform(-1.2, 1.2, 3), rng.uniform(0.5, 2.0))
        x = generate_codebook(1, n, s)[0]
        y = transmit(x, truth, s).y
        t = estimate_isi_type(x, y, grid)
        if t.interior:
            assert is_conditionally_typical(x, y, t.params, grid)


def test_interior_without_typicality_below_half_variance():
    # With sigma2_min = 1/4 an interior estimate at sigma2_hat < 1/2 need not be typical:
    # |res - s| < gamma only gives |nll - H| < n gamma / (2 s).
    n = 4096
    grid = default_grid(n, isi_len=1)
    x = generate_codebook(1, n, 0)[0]
    y = transmit(x, ChannelParams((1.0, 0.5), 0.16), 0).y
    t = estimate_isi_type(x, y, grid)
    assert t.interior and t.sigma2_hat == 0.25
    assert not is_conditionally_typical(x, y, t.params, grid)
