"""Deterministic synthesis of excitation signals, test channels and noise.

Every generator is a pure function of its parameters and an integer seed.
All randomness comes from numpy's PCG64 bit generator, which produces the
same stream on every platform for a given seed.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "make_rng",
    "white_noise",
    "sparse_impulse",
    "dispersive_impulse",
    "synthesize_echo",
    "noise_at_snr",
    "add_noise_at_snr",
]

_SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator for a 64-bit unsigned seed (wrapped mod 2**64)."""
    return np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))


def white_noise(n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. standard-normal samples."""
    if n < 1:
        raise ValueError(f"cannot generate an empty buffer (n={n})")
    return make_rng(seed).standard_normal(n)


def sparse_impulse(L: int, active: int, seed: int) -> np.ndarray:
    """Length-``L`` channel with exactly ``active`` standard-normal taps.

    Tap positions are drawn uniformly without replacement; every other tap
    is exactly zero.
    """
    if L < 1:
        raise ValueError(f"channel length must be positive, got {L}")
    if not 1 <= active <= L:
        raise ValueError(f"active tap count must lie in [1, {L}], got {active}")
    rng = make_rng(seed)
    positions = rng.choice(L, size=active, replace=False)
    amplitudes = rng.standard_normal(active)
    # a standard-normal draw of exactly 0.0 would break the tap count
    while np.any(amplitudes == 0.0):
        zero = amplitudes == 0.0
        amplitudes[zero] = rng.standard_normal(int(zero.sum()))
    h = np.zeros(L)
    h[positions] = amplitudes
    return h


def dispersive_impulse(L: int, seed: int) -> np.ndarray:
    """Length-``L`` channel with every tap i.i.d. standard normal."""
    if L <= 1:
        raise ValueError(f"channel length must exceed 1, got {L}")
    return make_rng(seed).standard_normal(L)


def synthesize_echo(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Causal convolution ``y(n) = sum_k h[k] x(n-k)`` with zero prehistory.

    The output has the same length as ``x``.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if x.size == 0:
        raise ValueError("input signal is empty")
    return np.convolve(x, h)[: x.size]


def noise_at_snr(y: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """White Gaussian noise scaled so that ``10 log10(P_y / P_v) == snr_db``.

    Both powers are empirical mean squares over the buffer. ``snr_db=inf``
    yields an all-zero noise vector.
    """
    y = np.asarray(y, dtype=float)
    p_y = float(np.mean(y * y)) if y.size else 0.0
    if p_y == 0.0:
        raise ValueError("SNR is undefined for an all-zero signal")
    if math.isinf(snr_db) and snr_db > 0:
        return np.zeros_like(y)
    v = make_rng(seed).standard_normal(y.size)
    target = p_y / 10.0 ** (snr_db / 10.0)
    return v * math.sqrt(target / float(np.mean(v * v)))


def add_noise_at_snr(y: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Microphone signal ``d = y + v`` with ``v`` from :func:`noise_at_snr`."""
    y = np.asarray(y, dtype=float)
    return y + noise_at_snr(y, snr_db, seed)
