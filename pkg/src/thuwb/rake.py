"""Rake combining-weight selection and the pulse-train cross-correlation primitive.

The cross-correlation here is the single signal-domain primitive shared by the
closed-form error analysis and the Monte Carlo engine: the correlation between
one user's received multipath pulse train and the Rake template, at an offset
of a whole number of chips plus a sub-chip jitter. Keeping one implementation
for both consumers means any theory/simulation gap is statistical, not a code
divergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .model import PulseShape, SystemParams

ARAKE = "arake"
SRAKE = "srake"
PRAKE = "prake"
EGC = "egc"

SCHEMES = (ARAKE, SRAKE, PRAKE, EGC)

__all__ = [
    "ARAKE",
    "SRAKE",
    "PRAKE",
    "EGC",
    "SCHEMES",
    "RakeWeights",
    "select_weights",
    "desired_amplitude",
    "lag_dot",
    "correlation_sequence",
    "cross_correlation",
    "cross_correlation_table",
]


@dataclass(frozen=True)
class RakeWeights:
    """Combining weights plus the scheme that produced them."""

    beta: np.ndarray
    scheme: str = ARAKE
    fingers: int | None = None

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        if beta.ndim != 1 or beta.size < 1:
            raise ValueError("beta must be a non-empty 1-D vector")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)


def _tap_vector(x) -> np.ndarray:
    """Accept a ChannelRealization, RakeWeights, or plain array of gains."""
    if isinstance(x, ChannelRealization):
        return x.taps
    if isinstance(x, RakeWeights):
        return x.beta
    return np.asarray(x, dtype=float)


def select_weights(channel: ChannelRealization, scheme: str, fingers: int | None = None) -> RakeWeights:
    """Maximal-ratio combining weights for the requested Rake structure.

    ``arake`` uses every path; ``srake`` keeps the ``fingers`` largest-gain
    paths (ties broken toward the lower index); ``prake`` keeps the first
    ``fingers`` paths. ``egc`` keeps the sign only, on the same selection as
    ``srake`` (or on all paths when ``fingers`` is None).
    """
    alpha = _tap_vector(channel)
    n = alpha.size
    if scheme not in SCHEMES:
        raise ValueError(f"unknown combining scheme {scheme!r}")
    if scheme in (SRAKE, PRAKE):
        if fingers is None or fingers < 1:
            raise ValueError(f"{scheme} requires fingers >= 1")
        if fingers > n:
            raise ValueError(f"fingers ({fingers}) exceeds the number of paths ({n})")
    beta = np.zeros(n)
    if scheme == ARAKE:
        beta[:] = alpha
    elif scheme == PRAKE:
        beta[:fingers] = alpha[:fingers]
    elif scheme == SRAKE:
        order = np.argsort(-np.abs(alpha), kind="stable")
        keep = order[:fingers]
        beta[keep] = alpha[keep]
    else:  # EGC
        if fingers is None:
            beta[:] = np.sign(alpha)
        else:
            if fingers < 1 or fingers > n:
                raise ValueError(f"fingers ({fingers}) must be in [1, {n}]")
            order = np.argsort(-np.abs(alpha), kind="stable")
            keep = order[:fingers]
            beta[keep] = np.sign(alpha[keep])
    return RakeWeights(beta, scheme, fingers)


def desired_amplitude(channel, weights, params: SystemParams) -> float:
    """Coefficient of the transmitted bit at the correlator output.

    Equals ``sqrt(E1 * n_frames)`` times the inner product of the channel
    gains and the combining weights.
    """
    alpha = _tap_vector(channel)
    beta = _tap_vector(weights)
    if alpha.size != beta.size:
        raise ValueError("channel and weights must have equal length")
    return float(np.sqrt(params.bit_energy[0] * params.n_frames) * (alpha @ beta))


def lag_dot(x, y, lag: int) -> float:
    """Sum of ``x[l] * y[l + lag]`` over valid l, for lag >= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if lag >= x.size:
        return 0.0
    return float(x[: x.size - lag] @ y[lag:])


def correlation_sequence(taps, weights) -> np.ndarray:
    """Chip-lag correlation sequence between a tap vector and the weights.

    Returns ``c`` of length ``2L + 1`` with ``c[L + j]`` holding the
    correlation at lag ``j``: ``sum_l alpha[l] * beta[l + j]`` for ``j >= 0``
    and ``sum_l beta[l] * alpha[l - j]`` for ``j < 0``. Both ends are zero.
    """
    alpha = _tap_vector(taps)
    beta = _tap_vector(weights)
    if alpha.size != beta.size:
        raise ValueError("taps and weights must have equal length")
    n = alpha.size
    c = np.zeros(2 * n + 1)
    for j in range(n):
        c[n + j] = lag_dot(alpha, beta, j)
    for j in range(1, n):
        c[n - j] = lag_dot(beta, alpha, j)
    return c


def cross_correlation(taps, weights, chip_offset: int, jitter: float, pulse: PulseShape) -> float:
    """Pulse-train/template cross-correlation at ``chip_offset`` chips + ``jitter``.

    A pulse offset by a chip fraction overlaps exactly two chip-aligned
    template pulses, so the value is the lag-``chip_offset`` correlation
    weighted by ``R(jitter)`` plus the next lag weighted by
    ``R(chip_time - jitter)``. Zero for offsets at or beyond the channel
    length on the right, or more than one chip beyond it on the left.
    """
    if not 0.0 <= jitter < pulse.chip_time:
        raise ValueError(f"jitter must lie in [0, chip_time), got {jitter}")
    c = correlation_sequence(taps, weights)
    n = (c.size - 1) // 2
    j = int(chip_offset)
    if j < -n - 1 or j > n - 1:
        return 0.0
    cj = c[n + j] if j >= -n else 0.0
    cj1 = c[n + j + 1]
    r0 = pulse.autocorrelation(jitter)
    r1 = pulse.autocorrelation(pulse.chip_time - jitter)
    return float(r0 * cj + r1 * cj1)


def cross_correlation_table(taps, weights, jitter: float, pulse: PulseShape) -> tuple[np.ndarray, np.ndarray]:
    """Cross-correlation at every chip offset with support, for one jitter.

    Returns ``(offsets, values)`` with ``offsets = -L .. L-1``; used by the
    Monte Carlo engine, which looks pulse collisions up by whole-chip
    distance.
    """
    if not 0.0 <= jitter < pulse.chip_time:
        raise ValueError(f"jitter must lie in [0, chip_time), got {jitter}")
    c = correlation_sequence(taps, weights)
    n = (c.size - 1) // 2
    r0 = pulse.autocorrelation(jitter)
    r1 = pulse.autocorrelation(pulse.chip_time - jitter)
    offsets = np.arange(-n, n)
    values = r0 * c[:-1] + r1 * c[1:]
    return offsets, values
