"""Closed-form interference variances and bit-error-probability expressions.

The Gaussian-approximation BEP of the Rake output is assembled from four
variance contributions: the two inter-frame-interference (IFI) terms of the
desired user, one multiple-access-interference (MAI) term per interferer, and
the filtered-noise term. All variance helpers return the unscaled bracketed
sums; the per-energy and processing-gain factors are applied once, in the BEP
assembler, so each sum can be validated in isolation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .model import PulseShape, SystemParams, gamma_factor, gauss_legendre, substream
from .rake import RakeWeights, _tap_vector, correlation_sequence, lag_dot

__all__ = [
    "BepMode",
    "BepQuery",
    "VarianceBreakdown",
    "q_function",
    "ifi_variance_components",
    "ifi_variance_adjacent",
    "mai_variance_sync",
    "mai_variance_jitter",
    "mai_variance_async",
    "variance_breakdown",
    "bep",
    "bep_async_exact",
    "average_bep",
]

_SQRT2 = math.sqrt(2.0)


def q_function(x):
    """Standard normal tail probability, via the complementary error function."""
    arr = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(arr / _SQRT2)
    return out if out.ndim else float(out)


def ifi_variance_components(taps, weights, n_chips_per_frame: int) -> tuple[float, float]:
    """The two unscaled IFI variance sums of the desired user.

    The first sum collects pulse spill-over of up to one frame (lags below
    ``min(n_chips_per_frame, L)``); the second collects the deeper spill that
    only exists when the channel is longer than a frame, and is zero for
    ``L <= n_chips_per_frame``. In the error probability the first term is
    scaled by ``E1 / (Nc * N)`` and the second by ``E1 / N``.
    """
    alpha = _tap_vector(taps)
    beta = _tap_vector(weights)
    if alpha.size != beta.size:
        raise ValueError("taps and weights must have equal length")
    n = alpha.size
    nc = int(n_chips_per_frame)
    if nc < 1:
        raise ValueError("n_chips_per_frame must be >= 1")
    near = 0.0
    for j in range(1, min(nc, n)):
        c = lag_dot(beta, alpha, j) + lag_dot(alpha, beta, j)
        near += j * c * c
    far = 0.0
    for j in range(1, n - nc + 1):
        c = lag_dot(beta, alpha, n - j) + lag_dot(alpha, beta, n - j)
        far += c * c
    return float(near), float(far)


def ifi_variance_adjacent(taps, weights) -> float:
    """Unscaled IFI variance sum in the adjacent-frame-only regime.

    Valid when the multipath spread does not exceed one frame plus one chip
    (``L <= Nc + 1``); runs over every lag instead of capping at the frame
    length. At ``L == Nc + 1`` this equals the two capped components
    assembled with their respective scalings, so both routes agree on the
    boundary.
    """
    alpha = _tap_vector(taps)
    beta = _tap_vector(weights)
    if alpha.size != beta.size:
        raise ValueError("taps and weights must have equal length")
    total = 0.0
    for j in range(1, alpha.size):
        c = lag_dot(beta, alpha, j) + lag_dot(alpha, beta, j)
        total += j * c * c
    return float(total)


def mai_variance_sync(taps, weights) -> float:
    """Unscaled MAI variance sum for a chip- or symbol-synchronized interferer.

    Scaled by ``E_k / N`` in the error probability. Independent of the whole-
    chip delay of the interferer, which is why the chip- and symbol-
    synchronous cases behave identically.
    """
    alpha = _tap_vector(taps)
    beta = _tap_vector(weights)
    if alpha.size != beta.size:
        raise ValueError("taps and weights must have equal length")
    n = alpha.size
    total = 0.0
    for lag in range(n):
        total += lag_dot(beta, alpha, lag) ** 2
    for lag in range(1, n):
        total += lag_dot(alpha, beta, lag) ** 2
    return float(total)


def _jitter_coefficients(taps, weights) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-lag coefficient vectors of the jitter-conditional MAI variance."""
    c = correlation_sequence(taps, weights)
    n = (c.size - 1) // 2
    c1 = c[1 : n + 1]
    c2 = c[0:n]
    c3 = c[n : 2 * n][::-1]
    c4 = c[n + 1 : 2 * n + 1][::-1]
    return c1, c2, c3, c4


def mai_variance_jitter(taps, weights, jitter, pulse: PulseShape):
    """Unscaled MAI variance sum for an interferer with a sub-chip jitter.

    ``jitter`` may be a scalar or an array (the result has the same shape).
    At zero jitter this reduces exactly to :func:`mai_variance_sync`.
    """
    jit = np.asarray(jitter, dtype=float)
    if np.any(jit < 0.0) or np.any(jit >= pulse.chip_time):
        raise ValueError("jitter must lie in [0, chip_time)")
    c1, c2, c3, c4 = _jitter_coefficients(taps, weights)
    flat = np.atleast_1d(jit).ravel()
    r = np.atleast_1d(pulse.autocorrelation(flat))
    rbar = np.atleast_1d(pulse.autocorrelation(pulse.chip_time - flat))
    g1 = c1[:, None] * rbar[None, :] + c2[:, None] * r[None, :]
    g2 = c3[:, None] * r[None, :] + c4[:, None] * rbar[None, :]
    out = np.sum(g1 * g1, axis=0) + np.sum(g2 * g2, axis=0)
    if jit.ndim == 0:
        return float(out[0])
    return out.reshape(jit.shape)


def mai_variance_async(taps, weights, pulse: PulseShape, nodes: int = 64) -> float:
    """Jitter-averaged MAI variance sum of an asynchronous interferer.

    The mean of :func:`mai_variance_jitter` over a jitter uniform on one
    chip, by Gauss-Legendre quadrature. The integrand is a quadratic form in
    the pulse autocorrelation, so 64 nodes are far more than enough for
    1e-9 absolute accuracy.
    """
    x, w = gauss_legendre(nodes)
    tc = pulse.chip_time
    eps = 0.5 * tc * (x + 1.0)
    vals = mai_variance_jitter(taps, weights, eps, pulse)
    # (1 / tc) * integral over [0, tc]; the affine map contributes tc / 2
    return float(0.5 * np.sum(w * vals))


class BepMode(str, enum.Enum):
    """Which closed-form error probability to evaluate."""

    SYNC = "sync"
    ASYNC_CONDITIONAL = "async_conditional"
    ASYNC_EXACT = "async_exact"
    ASYNC_SGA = "async_sga"
    AWGN_SYNC = "awgn_sync"
    AWGN_ASYNC = "awgn_async"
    AWGN_NO_POLARITY_SYNC = "awgn_no_polarity_sync"


_MULTIPATH_MODES = (BepMode.SYNC, BepMode.ASYNC_CONDITIONAL, BepMode.ASYNC_EXACT, BepMode.ASYNC_SGA)
_EQUAL_ENERGY_MODES = (
    BepMode.ASYNC_SGA,
    BepMode.AWGN_SYNC,
    BepMode.AWGN_ASYNC,
    BepMode.AWGN_NO_POLARITY_SYNC,
)


@dataclass(frozen=True)
class VarianceBreakdown:
    """Unscaled variance sums entering one BEP evaluation."""

    ifi1: float
    ifi2: float
    mai_per_user: tuple
    noise: float

    def __post_init__(self):
        parts = (self.ifi1, self.ifi2, self.noise) + tuple(self.mai_per_user)
        if any(p < 0 for p in parts):
            raise ValueError("variance components must be non-negative")


@dataclass(frozen=True)
class BepQuery:
    """One error-probability evaluation request.

    ``channels`` lists one realization per user (the first entry is the user
    of interest) and is required for the multipath modes; the AWGN modes use
    only the scalar system parameters. ``jitters`` holds one sub-chip offset
    per interferer and applies to the conditional mode only.
    """

    params: SystemParams
    mode: BepMode
    channels: tuple | None = None
    weights: RakeWeights | None = None
    pulse: PulseShape | None = None
    jitters: tuple | None = None
    mc_samples: int = 100_000
    exact_quad_max_users: int = 4
    quad_nodes: int = 64
    seed: int = 0

    def __post_init__(self):
        mode = BepMode(self.mode)
        object.__setattr__(self, "mode", mode)
        p = self.params
        if mode in _MULTIPATH_MODES:
            if self.channels is None or self.weights is None:
                raise ValueError(f"mode {mode.value} requires channels and weights")
            channels = tuple(self.channels)
            if len(channels) != p.n_users:
                raise ValueError("channels must hold one realization per user")
            n = channels[0].n_taps
            if any(ch.n_taps != n for ch in channels) or self.weights.beta.size != n:
                raise ValueError("channel and weight lengths must be consistent")
            object.__setattr__(self, "channels", channels)
        if mode in (BepMode.ASYNC_CONDITIONAL, BepMode.ASYNC_EXACT, BepMode.ASYNC_SGA, BepMode.AWGN_ASYNC):
            if self.pulse is None:
                raise ValueError(f"mode {mode.value} requires a pulse shape")
        if mode is BepMode.ASYNC_CONDITIONAL:
            if self.jitters is None:
                raise ValueError("async_conditional requires one jitter per interferer")
            jit = tuple(float(j) for j in self.jitters)
            if len(jit) != p.n_users - 1:
                raise ValueError("jitters must have one entry per interferer")
            tc = self.pulse.chip_time
            if any(j < 0 or j >= tc for j in jit):
                raise ValueError("jitters must lie in [0, chip_time)")
            object.__setattr__(self, "jitters", jit)
        if mode in _EQUAL_ENERGY_MODES and p.n_users > 1:
            energies = p.interferer_energies
            if any(e != energies[0] for e in energies):
                raise ValueError(f"mode {mode.value} assumes equal interferer energies")


def variance_breakdown(query: BepQuery) -> VarianceBreakdown:
    """Unscaled variance sums for the multipath modes (not the AWGN ones)."""
    mode = query.mode
    if mode not in (BepMode.SYNC, BepMode.ASYNC_CONDITIONAL, BepMode.ASYNC_SGA):
        raise ValueError(f"no per-term breakdown for mode {mode.value}")
    p = query.params
    alpha1 = query.channels[0].taps
    beta = query.weights.beta
    ifi1, ifi2 = ifi_variance_components(alpha1, beta, p.n_chips_per_frame)
    mai = []
    for k in range(1, p.n_users):
        taps = query.channels[k].taps
        if mode is BepMode.SYNC:
            mai.append(mai_variance_sync(taps, beta))
        elif mode is BepMode.ASYNC_CONDITIONAL:
            mai.append(float(mai_variance_jitter(taps, beta, query.jitters[k - 1], query.pulse)))
        else:
            mai.append(mai_variance_async(taps, beta, query.pulse, query.quad_nodes))
    noise = float(p.noise_psd * (beta @ beta))
    return VarianceBreakdown(ifi1, ifi2, tuple(mai), noise)


def _q_of_variance(numerator: float, variance: float) -> float:
    if variance <= 0.0:
        return 0.0 if numerator > 0 else 0.5
    return float(q_function(numerator / math.sqrt(variance)))


def _multipath_bep(query: BepQuery) -> float:
    p = query.params
    n_total = p.processing_gain
    vb = variance_breakdown(query)
    e1 = p.bit_energy[0]
    num = math.sqrt(e1) * float(query.channels[0].taps @ query.weights.beta)
    den = (
        e1 * vb.ifi1 / (p.n_chips_per_frame * n_total)
        + e1 * vb.ifi2 / n_total
        + sum(e * s for e, s in zip(p.interferer_energies, vb.mai_per_user)) / n_total
        + vb.noise
    )
    return _q_of_variance(num, den)


def bep_async_exact(query: BepQuery) -> tuple[float, float]:
    """Asynchronous BEP averaged over the interferer jitters, with its error.

    For a handful of interferers the jitter average is a tensor-product
    Gauss-Legendre quadrature (zero reported error); beyond
    ``exact_quad_max_users`` users it switches to Monte Carlo over the jitter
    cube and reports the standard error of the estimate.
    """
    if BepMode(query.mode) is not BepMode.ASYNC_EXACT:
        raise ValueError("bep_async_exact requires mode async_exact")
    p = query.params
    n_total = p.processing_gain
    e1 = p.bit_energy[0]
    alpha1 = query.channels[0].taps
    beta = query.weights.beta
    num = math.sqrt(e1) * float(alpha1 @ beta)
    ifi1, ifi2 = ifi_variance_components(alpha1, beta, p.n_chips_per_frame)
    base = (
        e1 * ifi1 / (p.n_chips_per_frame * n_total)
        + e1 * ifi2 / n_total
        + p.noise_psd * float(beta @ beta)
    )
    n_int = p.n_users - 1
    if n_int == 0:
        return _q_of_variance(num, base), 0.0
    tc = query.pulse.chip_time
    scale = np.asarray(p.interferer_energies) / n_total
    if p.n_users <= query.exact_quad_max_users:
        x, w = gauss_legendre(query.quad_nodes)
        eps = 0.5 * tc * (x + 1.0)
        wn = w / np.sum(w)  # normalized: quadrature of the uniform average
        den = np.full((1,) * n_int, base)
        for k in range(n_int):
            sig = np.asarray(
                mai_variance_jitter(query.channels[k + 1].taps, beta, eps, query.pulse)
            )
            shape = [1] * n_int
            shape[k] = eps.size
            den = den + scale[k] * sig.reshape(shape)
        probs = q_function(num / np.sqrt(den))
        weight = np.ones((1,) * n_int)
        for k in range(n_int):
            shape = [1] * n_int
            shape[k] = wn.size
            weight = weight * wn.reshape(shape)
        return float(np.sum(weight * probs)), 0.0
    rng = substream(query.seed, 0)
    eps = rng.uniform(0.0, tc, size=(query.mc_samples, n_int))
    den = np.full(query.mc_samples, base)
    for k in range(n_int):
        den += scale[k] * np.asarray(
            mai_variance_jitter(query.channels[k + 1].taps, beta, eps[:, k], query.pulse)
        )
    probs = q_function(num / np.sqrt(den))
    return float(np.mean(probs)), float(np.std(probs, ddof=1) / math.sqrt(probs.size))


def bep(query: BepQuery) -> float:
    """Bit error probability for the requested mode.

    The multipath modes assemble the closed-form variance sums; the AWGN
    modes are the single-path specializations. Every mode is strictly
    decreasing in the desired user's energy and increasing in the noise
    level.
    """
    p = query.params
    mode = BepMode(query.mode)
    n_total = p.processing_gain
    e1 = p.bit_energy[0]
    n_int = p.n_users - 1
    if mode in (BepMode.SYNC, BepMode.ASYNC_CONDITIONAL, BepMode.ASYNC_SGA):
        return _multipath_bep(query)
    if mode is BepMode.ASYNC_EXACT:
        return bep_async_exact(query)[0]
    if mode is BepMode.AWGN_SYNC:
        den = sum(p.interferer_energies) / n_total + p.noise_psd
        return _q_of_variance(math.sqrt(e1), den)
    e_int = p.interferer_energies[0] if n_int else 0.0
    if mode is BepMode.AWGN_ASYNC:
        den = n_int * gamma_factor(query.pulse) * e_int / n_total + p.noise_psd
        return _q_of_variance(math.sqrt(e1), den)
    # AWGN, synchronous, no polarity randomization: the per-pulse interference
    # terms add coherently, inflating the MAI by (n_frames - 1) / n_chips.
    den = (
        n_int * (e_int / n_total) * (1.0 + (p.n_frames - 1) / p.n_chips_per_frame)
        + p.noise_psd
    )
    return _q_of_variance(math.sqrt(e1), den)


def average_bep(queries: Sequence[BepQuery]) -> tuple[float, float]:
    """Mean BEP over a channel ensemble, with the standard error of the mean."""
    values = np.asarray([bep(q) for q in queries], dtype=float)
    if values.size == 0:
        raise ValueError("average_bep needs at least one query")
    if values.size == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))
