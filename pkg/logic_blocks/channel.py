# logic_blocks/channel.py
"""
Rayleigh MIMO channel in complex and real-stacked form.

Real form of H is [[Re, -Im], [Im, Re]]; vectors stack [Re; Im]. Complex noise
has variance noise_var per complex dimension, i.e. noise_var / 2 per real one.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from logic_blocks.errors import DomainError, ParameterError


@dataclass(frozen=True)
class RngStream:
    """Named stream of a seeded PCG64 family; equal (seed, stream) give equal draws."""

    seed: int
    stream: Union[int, Tuple[int, ...]] = 0

    @property
    def key(self) -> Tuple[int, ...]:
        return self.stream if isinstance(self.stream, tuple) else (int(self.stream),)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h_complex: np.ndarray
    h_real: np.ndarray

    @property
    def n_r(self) -> int:
        return self.h_complex.shape[0]

    @property
    def n_t(self) -> int:
        return self.h_complex.shape[1]


def real_form(h: np.ndarray) -> np.ndarray:
    """Works on (..., Nr, Nt) complex arrays."""
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def real_stack(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real, x.imag], axis=-1)


def complex_unstack(x: np.ndarray) -> np.ndarray:
    half = x.shape[-1] // 2
    return x[..., :half] + 1j * x[..., half:]


def _complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)


def sample_channel(n_t: int, n_r: int, rng) -> ChannelRealization:
    if n_t < 1 or n_r < 1:
        raise ParameterError("antenna counts must be >= 1")
    h = _complex_gaussian(as_generator(rng), (n_r, n_t))
    return ChannelRealization(h_complex=h, h_real=real_form(h))


def sample_channels(n_t: int, n_r: int, count: int, rng) -> np.ndarray:
    """Real-form stack of `count` independent channels, shape (count, 2Nr, 2Nt)."""
    if n_t < 1 or n_r < 1:
        raise ParameterError("antenna counts must be >= 1")
    return real_form(_complex_gaussian(as_generator(rng), (count, n_r, n_t)))


def _check_noise(noise_var: float):
    if noise_var < 0:
        raise DomainError("noise variance must be nonnegative")


def transmit(h: ChannelRealization, x, noise_var: float, rng) -> np.ndarray:
    """y = H x + v with v ~ N(0, noise_var/2 I); x already carries the codebook scale."""
    _check_noise(noise_var)
    x = np.asarray(x, dtype=float)
    y = h.h_real @ x
    if noise_var == 0:
        return y
    gen = as_generator(rng)
    return y + np.sqrt(noise_var / 2.0) * gen.standard_normal(y.shape)


def transmit_batch(h_real: np.ndarray, x: np.ndarray, noise_var: float, rng) -> np.ndarray:
    """Batched transmit: h_real (B, 2Nr, 2Nt), x (B, 2Nt) -> (B, 2Nr)."""
    _check_noise(noise_var)
    y = np.einsum("bij,bj->bi", h_real, x)
    if noise_var == 0:
        return y
    return y + np.sqrt(noise_var / 2.0) * as_generator(rng).standard_normal(y.shape)


def snr_to_noise_var(snr_db, e_s: float):
    """SNR = E_s / noise_var."""
    if e_s <= 0:
        raise DomainError("E_s must be positive")
    out = e_s / np.power(10.0, np.asarray(snr_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def noise_var_to_snr_db(noise_var, e_s: float):
    noise_var = np.asarray(noise_var, dtype=float)
    if np.any(noise_var <= 0):
        raise DomainError("noise variance must be positive")
    out = 10.0 * np.log10(e_s / noise_var)
    return float(out) if out.ndim == 0 else out
