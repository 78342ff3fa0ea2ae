# tests/test_channel.py
import numpy as np
import pytest

from logic_blocks.channel import (
    RngStream,
    as_generator,
    complex_unstack,
    noise_var_to_snr_db,
    real_form,
    real_stack,
    sample_channel,
    sample_channels,
    snr_to_noise_var,
    transmit,
    transmit_batch,
)
from logic_blocks.errors import DomainError, ParameterError


def test_real_form_of_scalar():
    h = np.array([[1 + 2j]])
    assert real_form(h).tolist() == [[1, -2], [2, 1]]


def test_real_form_matches_complex_product():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    assert np.allclose(real_form(h) @ real_stack(x), real_stack(h @ x))
    assert np.allclose(complex_unstack(real_stack(x)), x)


def test_channel_entries_have_unit_power():
    hs = sample_channels(2, 2, 25_000, RngStream(1, 0))
    assert hs.shape == (25_000, 4, 4)
    power = hs[:, :2, :2] ** 2 + hs[:, 2:, :2] ** 2
    assert power.mean() == pytest.approx(1.0, abs=0.02)


def test_streams_are_reproducible_and_distinct():
    a = sample_channel(2, 4, RngStream(2017, (3, 1)))
    b = sample_channel(2, 4, RngStream(2017, (3, 1)))
    c = sample_channel(2, 4, RngStream(2017, (3, 2)))
    assert np.array_equal(a.h_complex, b.h_complex)
    assert not np.array_equal(a.h_complex, c.h_complex)
    assert a.n_r == 4 and a.n_t == 2
    assert a.h_real.shape == (8, 4)


def test_as_generator_rejects_seed_ints():
    assert isinstance(as_generator(np.random.default_rng(1)), np.random.Generator)
    with pytest.raises(ParameterError):
        as_generator(5)


def test_noiseless_transmit_is_exact():
    h = sample_channel(2, 2, RngStream(5))
    x = np.array([1.0, -1.0, 0.0, 2.0])
    assert np.array_equal(transmit(h, x, 0.0, RngStream(6)), h.h_real @ x)


def test_noise_has_half_variance_per_real_dimension():
    hs = np.zeros((50_000, 2, 2))
    y = transmit_batch(hs, np.zeros((50_000, 2)), 0.8, RngStream(9))
    assert y.var() == pytest.approx(0.4, rel=0.03)


def test_transmit_is_linear_without_noise():
    hs = sample_channels(2, 3, 10, RngStream(4))
    x1 = np.ones((10, 4))
    x2 = np.arange(40, dtype=float).reshape(10, 4)
    y = transmit_batch(hs, 2 * x1 + x2, 0.0, RngStream(0))
    assert np.allclose(y, 2 * transmit_batch(hs, x1, 0.0, None) + transmit_batch(hs, x2, 0.0, None))


def test_negative_noise_variance():
    h = sample_channel(1, 1, RngStream(0))
    with pytest.raises(DomainError):
        transmit(h, [1.0, 0.0], -1.0, RngStream(0))


def test_snr_conversions():
    assert snr_to_noise_var(10.0, 2.0) == pytest.approx(0.2)
    assert isinstance(snr_to_noise_var(0.0, 1.0), float)
    grid = snr_to_noise_var([0.0, 10.0, 20.0], 1.0)
    assert np.allclose(grid, [1.0, 0.1, 0.01])
    assert noise_var_to_snr_db(0.2, 2.0) == pytest.approx(10.0)
    with pytest.raises(DomainError):
        noise_var_to_snr_db(0.0, 1.0)
