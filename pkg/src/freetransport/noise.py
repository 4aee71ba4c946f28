"""Hermitian Gaussian noise and seeded counter-based streams.

One GUE increment W has diagonal entries N(0, 1/N) and off-diagonal entries
whose real and imaginary parts are N(0, 1/(2N)), so E τ̂(W²) = 1 and W is a
standard Gaussian vector for the inner product Σ Re Tr(AB) scaled by 1/N.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Philox stream keyed by (seed, *key); draws advance its counter."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def gue_from_normals(z: np.ndarray) -> np.ndarray:
    """Map i.i.d. N(0,1) arrays (..., N, N) to GUE increments, one normal per real dof."""
    N = z.shape[-1]
    up = np.triu(z, 1)
    lo = np.tril(z, -1)
    re = up + np.swapaxes(up, -1, -2)
    lo_t = np.swapaxes(lo, -1, -2)
    im = lo_t - lo
    W = (re + 1j * im) * z.dtype.type(1 / np.sqrt(2 * N))
    idx = np.arange(N)
    W[..., idx, idx] = z[..., idx, idx] * z.dtype.type(1 / np.sqrt(N))
    return W


def gue(rng: np.random.Generator, shape, N: int, dtype=np.float64) -> np.ndarray:
    """GUE increments of shape (*shape, N, N); float32 ``dtype`` gives complex64 output."""
    shape = tuple(np.atleast_1d(shape)) if np.ndim(shape) or shape != () else ()
    return gue_from_normals(rng.standard_normal(shape + (N, N), dtype=dtype))
