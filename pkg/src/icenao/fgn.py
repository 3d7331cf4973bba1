"""Exact fractional Gaussian noise via circulant embedding.

Stationary zero-mean unit-variance fGn with Hurst index H has
autocovariance gamma(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2. Embedding
that sequence in a circulant matrix of order 2n diagonalized by the DFT
gives an exact O(n log n) sampler: draw complex normals, scale by the
square roots of the circulant eigenvalues, transform back.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError

EIG_CLIP = -1e-8


def fgn_autocovariance(h: float, max_lag: int) -> np.ndarray:
    """gamma(0..max_lag) for unit-variance fGn with Hurst index h."""
    if not 0.0 < h < 1.0:
        raise ContractError(f"Hurst index must be in (0, 1), got {h}")
    k = np.arange(max_lag + 1, dtype=float)
    return 0.5 * (np.abs(k + 1) ** (2 * h) - 2 * np.abs(k) ** (2 * h) + np.abs(k - 1) ** (2 * h))


def generate_fgn(h: float, n: int, seed: int) -> np.ndarray:
    """Draw one length-n path of fGn(h), deterministically from the seed."""
    if n < 1:
        raise ContractError(f"need a positive length, got {n}")
    gamma = fgn_autocovariance(h, n)
    # first row of the order-2n circulant: gamma(0..n), then gamma(n-1..1)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < EIG_CLIP:
        raise ContractError(
            f"circulant embedding is not nonnegative definite (min eigenvalue {eig.min():.3e})"
        )
    eig = np.clip(eig, 0.0, None)

    m = 2 * n
    rng = np.random.default_rng(seed)
    z = np.empty(m, dtype=complex)
    z[0] = rng.standard_normal() * np.sqrt(2.0)
    z[n] = rng.standard_normal() * np.sqrt(2.0)
    v1 = rng.standard_normal(n - 1)
    v2 = rng.standard_normal(n - 1)
    z[1:n] = v1 + 1j * v2
    z[n + 1 :] = (v1 - 1j * v2)[::-1]
    return np.fft.ifft(np.sqrt(eig * m / 2.0) * z)[:n].real
