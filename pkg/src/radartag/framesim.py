"""Frame synthesis: system geometry, SNR bookkeeping, and the observed matrix.

One frame is l pulse repetition intervals; each PRI contributes k = n + q
fast-time samples, arranged as one row of the l x k observation.  The
signal part is rank <= 2: an outer product of the tag codeword with the
backscatter pulse shape plus an outer product of all-ones with the direct
pulse shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTaps, response_vector
from .errors import DimensionMismatchError

__all__ = [
    "SystemParams",
    "SnrConfig",
    "FrameTruth",
    "FrameObservation",
    "AssumptionReport",
    "check_assumptions",
    "noise_variance",
    "snr_pair",
    "synthesize_frame",
]


@dataclass
class SystemParams:
    """Frame geometry plus the physical constants used by the feasibility checks."""

    n: int = 31            # source codeword length (chips)
    l: int = 10            # tag codeword length (PRIs)
    q: int = 2             # delay spread (bins); channels have q+1 taps
    n_pri: int = 150       # delay bins per PRI
    pri_s: float = 3e-6    # PRI duration (seconds)
    nu_max_hz: float = 0.0 # max absolute Doppler / carrier offset (Hz)

    def __post_init__(self):
        if self.n < 1 or self.l < 1 or self.q < 0:
            raise ValueError("need n >= 1, l >= 1, q >= 0")
        if self.n_pri < 1 or self.pri_s <= 0 or self.nu_max_hz < 0:
            raise ValueError("invalid PRI parameters")

    @property
    def k(self) -> int:
        """Fast-time samples per PRI."""
        return self.n + self.q


@dataclass
class SnrConfig:
    """Per-link SNR targets in dB; -inf switches a link off."""

    snr_str_db: float
    snr_sr_db: float


@dataclass
class FrameTruth:
    c: np.ndarray
    x: np.ndarray
    g_str: ChannelTaps
    g_sr: ChannelTaps
    c_index: int | None = None
    x_index: int | None = None


@dataclass
class FrameObservation:
    """Received l x k matrix with the noise level that produced it."""

    y: np.ndarray
    sigma_omega2: float
    truth: FrameTruth | None = None


@dataclass
class AssumptionReport:
    coherence_ok: bool
    timing_ok: bool
    coherence_product: float     # l * pri_s * nu_max
    coherence_threshold: float
    nu_max_bound_hz: float       # "much less than" bound 1 / (l * pri_s)
    n_pri_required: int          # n + q_max (exclusive lower bound on n_pri)


def check_assumptions(params: SystemParams, frame_len_l: int | None = None,
                      coherence_threshold: float = 0.1) -> AssumptionReport:
    """Feasibility report for the block-constant-channel and timing assumptions.

    The channel is treated as constant over the frame when
    l * pri_s * nu_max is well below one (threshold configurable), and the
    PRI must fit the pulse plus the largest delay: n_pri > n + q.
    """
    l = params.l if frame_len_l is None else int(frame_len_l)
    product = l * params.pri_s * params.nu_max_hz
    bound = 1.0 / (l * params.pri_s)
    q_max = params.q  # earliest arrival pinned to delay bin zero
    return AssumptionReport(
        coherence_ok=product < coherence_threshold,
        timing_ok=params.n_pri > params.n + q_max,
        coherence_product=product,
        coherence_threshold=coherence_threshold,
        nu_max_bound_hz=bound,
        n_pri_required=params.n + q_max,
    )


def noise_variance(snr: SnrConfig, n: int) -> tuple[float, float, float]:
    """Fix the noise variance to one and back out the per-link tap powers.

    The per-link SNR is n * sigma_i^2 / sigma_omega^2 for unimodular
    length-n codewords, so sigma_i^2 = 10^(snr_db/10) / n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    sigma_str2 = float(10.0 ** (snr.snr_str_db / 10.0) / n)
    sigma_sr2 = float(10.0 ** (snr.snr_sr_db / 10.0) / n)
    return 1.0, sigma_str2, sigma_sr2


def snr_pair(snr_sr_db: float, rho_db: float) -> SnrConfig:
    """SNR pair from the direct-link SNR and the power-imbalance ratio (dB)."""
    return SnrConfig(snr_str_db=snr_sr_db + rho_db, snr_sr_db=snr_sr_db)


def synthesize_frame(c, x, g_str: ChannelTaps, g_sr: ChannelTaps,
                     sigma_omega2: float, rng: np.random.Generator,
                     keep_truth: bool = True) -> FrameObservation:
    """One received frame: y = x a_str^T + 1 a_sr^T + noise.

    a_i is the pulse shape of codeword c through channel i; noise entries
    are i.i.d. circular complex Gaussian with variance sigma_omega2.
    """
    c = np.asarray(c, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if g_str.taps.size != g_sr.taps.size:
        raise DimensionMismatchError("channels must share the same delay spread")
    if sigma_omega2 < 0:
        raise ValueError("sigma_omega2 must be nonnegative")
    a_str = response_vector(c, g_str)
    a_sr = response_vector(c, g_sr)
    l, k = x.size, a_str.size
    y = np.outer(x, a_str) + np.outer(np.ones(l), a_sr)
    if sigma_omega2 > 0:
        scale = np.sqrt(sigma_omega2 / 2.0)
        y = y + scale * (rng.standard_normal((l, k)) + 1j * rng.standard_normal((l, k)))
    truth = FrameTruth(c=c, x=x, g_str=g_str, g_sr=g_sr) if keep_truth else None
    return FrameObservation(y=y, sigma_omega2=float(sigma_omega2), truth=truth)
