"""Tapped-delay-line channels and the convolution-structured maps they induce.

A channel is a vector of q+1 complex taps.  A codeword c of length n and a
channel g interact through the (n+q) x (q+1) Toeplitz convolution matrix
whose columns are delayed copies of c; the received pulse shape is its
product with the taps.  The dual factorization (channel-generated Toeplitz
matrix times the codeword) is what the pilot-aided decoders exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DimensionMismatchError, TooManyTapsError

__all__ = [
    "ChannelTaps",
    "sample_channel",
    "conv_matrix_from_code",
    "response_vector",
    "conv_matrix_from_channel",
]


@dataclass
class ChannelTaps:
    """Channel realization: taps, their support, and generation statistics."""

    taps: np.ndarray
    support: np.ndarray
    sigma2: float
    kappa_db: float

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.complex128)
        self.support = np.asarray(self.support, dtype=np.int64)

    @property
    def q(self) -> int:
        return self.taps.size - 1


def sample_channel(q: int, n_taps: int, sigma2: float, kappa_db: float,
                   sparse: bool, rng: np.random.Generator) -> ChannelTaps:
    """Draw q+1 taps with ``n_taps`` nonzero entries.

    Each nonzero tap is sqrt(sigma2) times a specular term of deterministic
    magnitude and uniform phase plus a circular complex Gaussian diffuse
    term, mixed by the linear specular-to-diffuse ratio 10^(kappa_db/10) so
    that E|tap|^2 = sigma2.  Dense mode uses delays 0..n_taps-1; sparse mode
    draws the support uniformly without replacement.
    """
    if n_taps < 1 or n_taps > q + 1:
        raise TooManyTapsError(f"n_taps must lie in [1, {q + 1}], got {n_taps}")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if sparse:
        support = np.sort(rng.choice(q + 1, size=n_taps, replace=False))
    else:
        support = np.arange(n_taps)
    if np.isinf(kappa_db):
        spec_frac, diff_frac = (1.0, 0.0) if kappa_db > 0 else (0.0, 1.0)
    else:
        kappa = 10.0 ** (kappa_db / 10.0)
        spec_frac = kappa / (1.0 + kappa)
        diff_frac = 1.0 / (1.0 + kappa)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_taps)
    diffuse = (rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps)) / np.sqrt(2.0)
    values = np.sqrt(sigma2) * (np.sqrt(spec_frac) * np.exp(1j * phases)
                                + np.sqrt(diff_frac) * diffuse)
    taps = np.zeros(q + 1, dtype=np.complex128)
    taps[support] = values
    return ChannelTaps(taps=taps, support=support, sigma2=sigma2, kappa_db=kappa_db)


def conv_matrix_from_code(c, q: int) -> np.ndarray:
    """(n+q) x (q+1) Toeplitz matrix whose column j is c delayed by j."""
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim != 1 or c.size < 1:
        raise DimensionMismatchError("codeword must be a nonempty vector")
    if q < 0:
        raise ValueError("q must be nonnegative")
    col = np.concatenate([c, np.zeros(q, dtype=np.complex128)])
    row = np.zeros(q + 1, dtype=np.complex128)
    row[0] = c[0]
    return toeplitz(col, row)


def _taps_of(g) -> np.ndarray:
    return g.taps if isinstance(g, ChannelTaps) else np.asarray(g, dtype=np.complex128)


def response_vector(c, g) -> np.ndarray:
    """Received pulse shape of codeword c through channel g: length n+q."""
    taps = _taps_of(g)
    if taps.ndim != 1 or taps.size < 1:
        raise DimensionMismatchError("channel taps must be a nonempty vector")
    return conv_matrix_from_code(c, taps.size - 1) @ taps


def conv_matrix_from_channel(g, n_pilot: int, n_data: int) -> tuple[np.ndarray, np.ndarray]:
    """Channel-generated convolution matrix, split into pilot/data columns.

    The horizontal concatenation is the (n+q) x n Toeplitz matrix of the
    taps, so that Gamma_P c_P + Gamma_D c_D equals the response vector of
    c = [c_P; c_D] through g for every codeword split.
    """
    taps = _taps_of(g)
    n = n_pilot + n_data
    if n_pilot < 0 or n_data < 0 or n < 1:
        raise DimensionMismatchError("pilot/data lengths must be nonnegative, n >= 1")
    col = np.concatenate([taps, np.zeros(n - 1, dtype=np.complex128)])
    row = np.zeros(n, dtype=np.complex128)
    row[0] = taps[0]
    full = toeplitz(col, row)
    return full[:, :n_pilot], full[:, n_pilot:]
