"""Decoders for the pilot-free scheme: whole-codeword modulation on both links.

The zero-sum constraint on the tag codebook makes the backscatter and
direct components orthogonal in slow time, so the full regularized LS
objective splits, per candidate pair (c, x), into

    -(1/L) ||Y^T x*||^2
    + L ||(1/L) Y^T x* - Xi_c g_str||^2 + lambda_str phi(g_str)   (backscatter fit)
    + L ||(1/L) Y^T 1  - Xi_c g_sr ||^2 + lambda_sr  phi(g_sr)    (direct fit)

up to candidate-independent terms.  Joint decoding scores every pair with
the channel fits at their per-candidate minimizers; disjoint decoding picks
the tag codeword first by slow-time correlation energy, then the source
codeword.  With phi = squared norm the channel fits are closed-form ridge
solutions; with phi = l1 they are LASSO problems solved by FISTA.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelTaps, conv_matrix_from_code
from .codebooks import SourceCodebook, TagCodebook
from .errors import DimensionMismatchError, EmptyCodebookError, RadarTagError, SingularSystemError
from .solvers import (
    RegularizationConfig,
    _power_iteration_largest,
    fista_precomputed,
    fista_stacked,
)

__all__ = [
    "PilotFreeResult",
    "channel_estimates_given",
    "decode_joint",
    "decode_disjoint",
    "decode_perfect_csi",
]

log = logging.getLogger(__name__)


@dataclass
class PilotFreeResult:
    """Decoded pair, channel estimates at that pair, and the objective value."""

    c_index: int
    x_index: int
    c_hat: np.ndarray
    x_hat: np.ndarray
    g_str_hat: np.ndarray
    g_sr_hat: np.ndarray
    metric: float


@lru_cache(maxsize=64)
def _cached_source_ops(words_bytes: bytes, m: int, n: int, q: int, big_l: int,
                       lam_str: float, lam_sr: float):
    """Per-codeword convolution matrices and ridge solve operators.

    The solve operators (L Xi^H Xi + lam I)^{-1} Xi^H are what every
    per-candidate channel estimate applies to a slow-time-projected
    observation, so they are computed once per (codebook, lambda, L).
    """
    words = np.frombuffer(words_bytes, dtype=np.int64).reshape(m, n)
    eye = np.eye(q + 1)
    xis, ops_str, ops_sr, grams, lips = [], [], [], [], []
    for word in words:
        xi = conv_matrix_from_code(word, q)
        gram = big_l * (xi.conj().T @ xi)
        try:
            ops_str.append(np.linalg.solve(gram + lam_str * eye, xi.conj().T))
            ops_sr.append(np.linalg.solve(gram + lam_sr * eye, xi.conj().T))
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                "unregularized channel estimate needs full-column-rank "
                "convolution matrices"
            ) from exc
        xis.append(xi)
        grams.append(gram)
        lips.append(_power_iteration_largest(gram))
    return tuple(xis), tuple(ops_str), tuple(ops_sr), tuple(grams), tuple(lips)


def _source_ops(source: SourceCodebook, q: int, big_l: int, reg: RegularizationConfig):
    words = np.ascontiguousarray(source.words, dtype=np.int64)
    return _cached_source_ops(words.tobytes(), words.shape[0], words.shape[1], q,
                              big_l, float(reg.lambda_str), float(reg.lambda_sr))


def _str_fit(xi, op_str, gram, lipschitz, u_cols, big_l, reg):
    """Backscatter channel estimates and fit value for one source codeword.

    ``u_cols`` holds Y^T x* for one or more tag candidates as columns.
    The l1 path solves min ||sqrt(L) Xi g - u/sqrt(L)||^2 + lam |g|_1 on its
    normal-equation form (gram = L Xi^H Xi is shared with the ridge path),
    warm-started at the ridge solution.  Returns (gamma (q+1, r), fit (r,)).
    """
    warm = op_str @ u_cols
    if reg.kind == "l2":
        gamma = warm
        penalty = reg.lambda_str * np.sum(np.abs(gamma) ** 2, axis=0)
    else:
        sol = fista_precomputed(gram, xi.conj().T @ u_cols,
                                np.sum(np.abs(u_cols) ** 2, axis=0) / big_l,
                                lipschitz, reg.lambda_str, reg, x0=warm)
        gamma = sol.gamma if sol.gamma.ndim == 2 else sol.gamma[:, None]
        penalty = reg.lambda_str * np.sum(np.abs(gamma), axis=0)
    resid = u_cols / big_l - xi @ gamma
    fit = big_l * np.sum(np.abs(resid) ** 2, axis=0) + penalty
    return gamma, fit


def _sr_fit(xi, op_sr, gram, lipschitz, u_ones, big_l, reg):
    """Direct-link channel estimate and fit value for one source codeword."""
    warm = op_sr @ u_ones
    if reg.kind == "l2":
        gamma = warm
        penalty = reg.lambda_sr * float(np.sum(np.abs(gamma) ** 2))
    else:
        sol = fista_precomputed(gram, xi.conj().T @ u_ones,
                                float(np.sum(np.abs(u_ones) ** 2)) / big_l,
                                lipschitz, reg.lambda_sr, reg, x0=warm)
        gamma = sol.gamma
        penalty = reg.lambda_sr * float(np.sum(np.abs(gamma)))
    resid = u_ones / big_l - xi @ gamma
    fit = big_l * float(np.sum(np.abs(resid) ** 2)) + penalty
    return gamma, fit


def _all_candidate_fits(ops, u_cols, u_ones, big_l, reg):
    """Channel fits of every source codeword against every projection column.

    Returns (f_str (Mc, r), gam_str (Mc, q+1, r), f_sr (Mc,), gam_sr
    (Mc, q+1)).  The l2 path loops the small closed forms; the l1 path
    solves all Mc codewords' LASSO families in one stacked FISTA run.
    """
    xis, ops_str, ops_sr, grams, lips = ops
    mc = len(xis)
    xi_stack = np.stack(xis)
    if reg.kind == "l2":
        f_str = []
        f_sr = []
        gam_str = []
        gam_sr = []
        for ci in range(mc):
            g_str, fs = _str_fit(xis[ci], ops_str[ci], grams[ci], lips[ci],
                                 u_cols, big_l, reg)
            g_sr, fr = _sr_fit(xis[ci], ops_sr[ci], grams[ci], lips[ci],
                               u_ones, big_l, reg)
            f_str.append(fs)
            f_sr.append(fr)
            gam_str.append(g_str)
            gam_sr.append(g_sr)
        return (np.stack(f_str), np.stack(gam_str),
                np.asarray(f_sr), np.stack(gam_sr))

    gram_stack = np.stack(grams)
    lip_stack = np.asarray(lips)
    xi_h = xi_stack.conj().transpose(0, 2, 1)
    r = u_cols.shape[1]
    # backscatter family: r columns per codeword
    warm = np.stack(ops_str) @ u_cols
    bn2 = np.broadcast_to(np.sum(np.abs(u_cols) ** 2, axis=0) / big_l, (mc, r))
    gam_str = fista_stacked(gram_stack, xi_h @ u_cols, bn2, lip_stack,
                            reg.lambda_str, reg, warm)
    resid = u_cols[None, :, :] / big_l - xi_stack @ gam_str
    f_str = (big_l * np.sum(np.abs(resid) ** 2, axis=1)
             + reg.lambda_str * np.sum(np.abs(gam_str), axis=1))
    # direct family: one column per codeword
    warm1 = (np.stack(ops_sr) @ u_ones)[:, :, None]
    bn1 = np.full((mc, 1), float(np.sum(np.abs(u_ones) ** 2)) / big_l)
    gam_sr = fista_stacked(gram_stack, (xi_h @ u_ones)[:, :, None], bn1,
                           lip_stack, reg.lambda_sr, reg, warm1)
    resid1 = u_ones[None, :, None] / big_l - xi_stack @ gam_sr
    f_sr = (big_l * np.sum(np.abs(resid1) ** 2, axis=(1, 2))
            + reg.lambda_sr * np.sum(np.abs(gam_sr), axis=(1, 2)))
    return f_str, gam_str, f_sr, gam_sr[:, :, 0]


def _frame_dims(y: np.ndarray, source: SourceCodebook, tag: TagCodebook) -> int:
    if len(source) < 1 or len(tag) < 1:
        raise EmptyCodebookError("both codebooks must be nonempty")
    big_l, k = y.shape
    if tag.l != big_l:
        raise DimensionMismatchError(f"frame has {big_l} PRIs but tag words have {tag.l}")
    q = k - source.n
    if q < 0:
        raise DimensionMismatchError(f"frame has {k} fast-time samples < n = {source.n}")
    return q


def channel_estimates_given(c, x, y, reg: RegularizationConfig):
    """Channel estimates for a fixed candidate pair.

    The backscatter estimate fits Xi_c g to the slow-time projection
    (1/L) Y^T x*, the direct estimate to the slow-time average (1/L) Y^T 1,
    each with its own regularization weight.
    """
    c = np.asarray(c, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    big_l, k = y.shape
    if x.size != big_l:
        raise DimensionMismatchError("tag codeword length must match frame rows")
    q = k - c.size
    if q < 0:
        raise DimensionMismatchError("codeword longer than fast-time window")
    xi = conv_matrix_from_code(c, q)
    eye = np.eye(q + 1)
    gram = big_l * (xi.conj().T @ xi)
    op_str = np.linalg.solve(gram + reg.lambda_str * eye, xi.conj().T)
    op_sr = np.linalg.solve(gram + reg.lambda_sr * eye, xi.conj().T)
    lipschitz = _power_iteration_largest(gram)
    u_x = y.T @ x.conj()
    u_1 = y.sum(axis=0)
    g_str, _ = _str_fit(xi, op_str, gram, lipschitz, u_x[:, None], big_l, reg)
    g_sr, _ = _sr_fit(xi, op_sr, gram, lipschitz, u_1, big_l, reg)
    return g_str[:, 0], g_sr


def decode_joint(y, source: SourceCodebook, tag: TagCodebook,
                 reg: RegularizationConfig, cross_check: bool = False) -> PilotFreeResult:
    """Exhaustive joint decoding over all |C| x |X| candidate pairs.

    Ties break toward the smallest (source, tag) index pair.  With
    ``cross_check`` and l2 regularization, the winner is verified against
    the algebraically equivalent quadratic-form maximization.
    """
    y = np.asarray(y, dtype=np.complex128)
    if cross_check and reg.kind != "l2":
        raise ValueError("cross_check applies to l2 regularization only")
    q = _frame_dims(y, source, tag)
    big_l = y.shape[0]
    ops = _source_ops(source, q, big_l, reg)

    u_cols = y.T @ tag.words.T.astype(np.complex128)  # (k, |X|); words are real
    u_ones = y.sum(axis=0)
    tag_term = -np.sum(np.abs(u_cols) ** 2, axis=0) / big_l

    f_str, gam_str, f_sr, gam_sr = _all_candidate_fits(ops, u_cols, u_ones,
                                                       big_l, reg)
    metric = tag_term[None, :] + f_str + f_sr[:, None]

    flat = int(np.argmin(metric))
    ci, xi_idx = divmod(flat, len(tag))
    if cross_check:
        xi_stack = np.stack(ops[0])
        quad_str = np.real(np.einsum("kj,skj->sj", u_cols.conj(),
                                     xi_stack @ gam_str))
        quad_sr = np.real(np.einsum("k,sk->s", u_ones.conj(),
                                    (xi_stack @ gam_sr[:, :, None])[:, :, 0]))
        flat_max = int(np.argmax(quad_str + quad_sr[:, None]))
        if flat_max != flat:
            raise RadarTagError(
                f"joint-decoding cross-check failed: decomposed argmin {divmod(flat, len(tag))}"
                f" != quadratic-form argmax {divmod(flat_max, len(tag))}"
            )
    if metric.min() == metric.max():
        log.debug("degenerate joint decode: all %d candidate metrics equal", metric.size)
    return PilotFreeResult(
        c_index=ci, x_index=xi_idx,
        c_hat=source.words[ci].copy(), x_hat=tag.words[xi_idx].copy(),
        g_str_hat=gam_str[ci, :, xi_idx].copy(), g_sr_hat=gam_sr[ci].copy(),
        metric=float(metric[ci, xi_idx]),
    )


def decode_disjoint(y, source: SourceCodebook, tag: TagCodebook,
                    reg: RegularizationConfig,
                    use_str_for_source: bool = True) -> PilotFreeResult:
    """Two-stage decoding: tag first by correlation energy, then the source.

    The tag stage needs no source knowledge; the source stage scores each
    codeword by the direct-link fit plus, unless ``use_str_for_source`` is
    off, the backscatter fit at the decoded tag codeword.
    """
    y = np.asarray(y, dtype=np.complex128)
    q = _frame_dims(y, source, tag)
    big_l = y.shape[0]
    ops = _source_ops(source, q, big_l, reg)

    u_cols = y.T @ tag.words.T.astype(np.complex128)
    energies = np.sum(np.abs(u_cols) ** 2, axis=0)
    xi_idx = int(np.argmax(energies))
    u_x = u_cols[:, xi_idx:xi_idx + 1]
    u_ones = y.sum(axis=0)

    f_str, gam_str, f_sr, gam_sr = _all_candidate_fits(ops, u_x, u_ones,
                                                       big_l, reg)
    fits_str = f_str[:, 0]
    scores = f_sr + (fits_str if use_str_for_source else 0.0)
    ci = int(np.argmin(scores))

    # report the full joint objective at the returned pair either way
    metric = float(-energies[xi_idx] / big_l + fits_str[ci] + f_sr[ci])
    return PilotFreeResult(
        c_index=ci, x_index=xi_idx,
        c_hat=source.words[ci].copy(), x_hat=tag.words[xi_idx].copy(),
        g_str_hat=gam_str[ci, :, 0].copy(), g_sr_hat=gam_sr[ci].copy(),
        metric=metric,
    )


def decode_perfect_csi(y, source: SourceCodebook, tag: TagCodebook,
                       g_str: ChannelTaps, g_sr: ChannelTaps) -> PilotFreeResult:
    """Benchmark decoder: exhaustive data-fidelity minimization at known channels."""
    y = np.asarray(y, dtype=np.complex128)
    q = _frame_dims(y, source, tag)
    if g_str.taps.size != q + 1 or g_sr.taps.size != q + 1:
        raise DimensionMismatchError("channel length inconsistent with frame width")
    big_l = y.shape[0]
    words_conj = tag.words.astype(np.complex128)  # real +/-1, conjugation free

    metric = np.empty((len(source), len(tag)))
    for ci, word in enumerate(source.words):
        xi = conv_matrix_from_code(word, q)
        a = xi @ g_str.taps
        b = xi @ g_sr.taps
        z = y - np.outer(np.ones(big_l), b)
        base = float(np.sum(np.abs(z) ** 2)) + big_l * float(np.sum(np.abs(a) ** 2))
        cross = np.real(words_conj @ (z @ a.conj()))
        metric[ci] = base - 2.0 * cross
    flat = int(np.argmin(metric))
    ci, xi_idx = divmod(flat, len(tag))
    return PilotFreeResult(
        c_index=ci, x_index=xi_idx,
        c_hat=source.words[ci].copy(), x_hat=tag.words[xi_idx].copy(),
        g_str_hat=g_str.taps.copy(), g_sr_hat=g_sr.taps.copy(),
        metric=float(metric[ci, xi_idx]),
    )
