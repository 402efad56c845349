"""Seeding helpers.

Every random quantity in the toolkit flows from a single master seed
through `derive_seed`, so regenerating any artifact (RIR bank, dataset,
model) is reproducible across runs and platforms.  The bit generator is
Philox (64-bit counter-based), and Gaussian samples for noise synthesis
are drawn with an explicit Box-Muller transform on Philox uniforms.
"""

import hashlib

import numpy as np

__all__ = ["derive_seed", "generator", "normal_box_muller"]


def derive_seed(master_seed, *tags):
    """Derive a child seed from a master seed and a sequence of tags.

    Stable across processes and platforms (SHA-256 based, unlike
    ``hash()``).  Tags may be strings, ints or floats.
    """
    h = hashlib.sha256()
    h.update(str(int(master_seed)).encode())
    for tag in tags:
        h.update(b"/")
        h.update(repr(tag).encode())
    return int.from_bytes(h.digest()[:8], "little")


def generator(seed):
    """A numpy Generator backed by the Philox counter-based PRNG."""
    return np.random.Generator(np.random.Philox(np.uint64(seed)))


def normal_box_muller(gen, size):
    """Standard-normal samples via Box-Muller on Philox uniforms.

    Parameters
    ----------
    gen : np.random.Generator
    size : int
        Number of samples to return.

    Returns
    -------
    np.ndarray of float64, shape (size,)
    """
    if size < 0:
        raise ValueError("size must be non-negative")
    pairs = (size + 1) // 2
    # u1 in (0, 1] so that log(u1) is finite; u2 in [0, 1)
    u1 = 1.0 - gen.random(pairs)
    u2 = gen.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[:size]
