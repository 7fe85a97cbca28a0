"""Discretized space-time white noise and seeded stream derivation."""
import zlib

import numpy as np

from ..models.states import NoiseIncrement


def derive_rng(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """
    Build an independent stream for one logical task.

    The stream depends only on (seed, tag, indices), never on the order in
    which tasks run.

    Args:
        seed: Master seed (unsigned 64-bit)
        tag: Component name, e.g. "truth" or "mh-proposal"
        indices: Chain, member, cycle or time indices

    Returns:
        A PCG64-backed Generator
    """
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    key = (zlib.crc32(tag.encode("utf-8")),) + tuple(int(i) for i in indices)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=key)))


def noise_std(sigma: float, dt: float, dx: float) -> float:
    return sigma * np.sqrt(dt / dx)


def spacetime_noise_increment(
    n: int,
    sigma: float,
    dt: float,
    dx: float,
    rng: np.random.Generator,
) -> NoiseIncrement:
    """Length-n vector of independent N(0, sigma^2 dt/dx) draws."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if sigma == 0:
        values = np.zeros(n)
    else:
        values = noise_std(sigma, dt, dx) * rng.standard_normal(n)
    return NoiseIncrement(values=values, step=dt, spacing=dx, sigma=sigma)
