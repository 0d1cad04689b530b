import numpy as np
import pytest

from isidec.channel import convolve, generate_codebook, stream, transmit
from isidec.errors import DomainError, ResourceError
from isidec.grid import default_grid
from isidec.spectral import ChannelParams, autocorrelation


def test_codebook_deterministic():
    a = generate_codebook(1, 4, 99)
    b = generate_codebook(1, 4, 99)
    np.testing.assert_array_equal(a.words, b.words)


def test_codebook_seed_sensitivity():
    assert not np.array_equal(generate_codebook(2, 4, 1).words, generate_codebook(2, 4, 2).words)


def test_codebook_word_depends_only_on_seed_and_index():
    small = generate_codebook(3, 50, 8)
    big = generate_codebook(10, 50, 8)
    np.testing.assert_array_equal(small.words, big.words[:3])


def test_codebook_moments():
    cb = generate_codebook(2, 100_000, 12)
    assert np.all(np.abs(cb.words.mean(axis=1)) < 0.02)
    assert np.all(np.abs((cb.words**2).mean(axis=1) - 1) < 0.02)


def test_codebook_validation():
    with pytest.raises(DomainError):
        generate_codebook(0, 4, 1)
    with pytest.raises(ResourceError):
        generate_codebook(1000, 1000, 1, memory_budget=10_000)


def test_codebook_rate():
    assert generate_codebook(16, 256, 0).rate == pytest.approx(np.log(16) / 256)


def test_streams_are_order_independent():
    first = stream(5, "noise", 3).standard_normal(4)
    stream(5, "noise", 2).standard_normal(4)
    np.testing.assert_array_equal(first, stream(5, "noise", 3).standard_normal(4))
    assert not np.array_equal(first, stream(5, "message", 3).standard_normal(4))


@pytest.mark.parametrize("h, x, expected", [
    ((1,), (3, -2), (3, -2)),
    ((1, 1), (1, 2, 3), (1, 3, 5, 3)),
    ((0, 0, 0), (1, -4, 2), (0, 0, 0, 0, 0)),
])
def test_convolve(h, x, expected):
    np.testing.assert_array_equal(convolve(h, x), expected)


def test_transmit_vanishing_noise():
    x = generate_codebook(1, 64, 3)[0]
    p = ChannelParams((0.8, -0.3, 0.1), 1e-30)
    tx = transmit(x, p, 4)
    assert tx.y.size == 66
    np.testing.assert_allclose(tx.y, convolve(p.h, x), atol=1e-10)


def test_transmit_noise_power():
    n = 100_000
    tx = transmit(np.zeros(n), ChannelParams((0.5, 2.0), 1.0), 17)
    assert abs(np.mean(tx.y[:n] ** 2) - 1) < 0.02


def test_transmit_deterministic():
    x = generate_codebook(1, 32, 1)[0]
    p = ChannelParams((1, 0.5), 0.3)
    np.testing.assert_array_equal(transmit(x, p, 9).y, transmit(x, p, 9).y)
    assert not np.array_equal(transmit(x, p, 9).y, transmit(x, p, 9, index=1).y)


def test_a_set_statistics():
    # Shifted cross-correlations and powers of random codewords stay within gamma_n.
    n = 4096
    grid = default_grid(n)
    assert grid.isi_len == 12
    cb = generate_codebook(100, n, 2024)
    good = 0
    for x in cb.words:
        xp = np.concatenate([np.zeros(grid.isi_len), x])
        shifts = np.array([xp[grid.isi_len - k: grid.isi_len - k + n] for k in range(grid.isi_len + 1)])
        C = shifts @ shifts.T / n
        off = np.abs(C[np.triu_indices(grid.isi_len + 1, 1)])
        diag = np.abs(np.diag(C) - 1)
        good += bool(np.all(off < grid.gamma) and np.all(diag < grid.gamma))
    assert good >= 90


def test_parseval_power():
    rng = np.random.default_rng(8)
    n = 4096
    for i in range(10):
        h = rng.normal(size=rng.integers(1, 6))
        x = generate_codebook(1, n, 100 + i)[0]
        ratio = np.sum(convolve(h, x) ** 2) / (autocorrelation(h)[0] * np.sum(x**2))
        assert abs(ratio - 1) < 0.05
