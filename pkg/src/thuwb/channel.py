"""Multipath channel realizations, lognormal fading ensembles, and user delays."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams, as_generator

# Reference 10-tap multipath profile used throughout the bundled experiments.
FIXED_CHANNEL_TAPS = (
    0.4653,
    0.5817,
    0.2327,
    -0.4536,
    0.3490,
    0.2217,
    -0.1163,
    0.0233,
    -0.0116,
    -0.0023,
)

__all__ = [
    "FIXED_CHANNEL_TAPS",
    "ChannelRealization",
    "FadingModel",
    "SyncMode",
    "fixed_channel",
    "gen_lognormal_channel",
    "gen_delays",
    "decompose_delay",
]


class SyncMode(str, enum.Enum):
    """Relative timing of the interfering users.

    Symbol-synchronous users have zero delay, chip-synchronous users are
    offset by a whole number of chips, and asynchronous users by a continuous
    uniform delay over one symbol.
    """

    SYMBOL_SYNC = "symbol_sync"
    CHIP_SYNC = "chip_sync"
    ASYNC = "async"


@dataclass(frozen=True)
class ChannelRealization:
    """Tapped-delay-line channel: one gain per chip-spaced path, plus a delay."""

    taps: np.ndarray
    delay: float = 0.0

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D vector")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        if self.delay < 0:
            raise ValueError("delay must be >= 0")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "delay", float(self.delay))

    @property
    def n_taps(self) -> int:
        return self.taps.size

    def to_dict(self) -> dict:
        return {"taps": [float(t) for t in self.taps], "delay": self.delay}

    @classmethod
    def from_dict(cls, record: dict) -> "ChannelRealization":
        return cls(np.asarray(record["taps"], dtype=float), float(record["delay"]))


def fixed_channel() -> ChannelRealization:
    """The built-in reference multipath profile (zero delay)."""
    return ChannelRealization(np.array(FIXED_CHANNEL_TAPS), 0.0)


@dataclass(frozen=True)
class FadingModel:
    """Lognormal tap magnitudes with an exponentially decaying energy profile.

    Tap ``l`` (1-based) has random sign and magnitude ``exp(N(mu_l, s2))``
    with ``mu_l`` chosen so the mean tap energies follow
    ``omega0 * exp(-decay * (l - 1))`` and sum to one.
    """

    n_taps: int
    decay: float
    log_variance: float

    def __post_init__(self):
        if self.n_taps < 1:
            raise ValueError("n_taps must be >= 1")
        if self.decay <= 0 or self.log_variance <= 0:
            raise ValueError("decay and log_variance must be > 0")

    @property
    def leading_tap_energy(self) -> float:
        """Mean energy of the first tap; normalizes the profile to unit total."""
        lam = self.decay
        return (1.0 - math.exp(-lam)) / (1.0 - math.exp(-lam * self.n_taps))

    def tap_energy_profile(self) -> np.ndarray:
        l = np.arange(self.n_taps)
        return self.leading_tap_energy * np.exp(-self.decay * l)

    def log_means(self) -> np.ndarray:
        """Per-tap means of the log-magnitude distribution."""
        l = np.arange(self.n_taps)
        return 0.5 * (
            math.log(self.leading_tap_energy) - self.decay * l - 2.0 * self.log_variance
        )


def gen_lognormal_channel(model: FadingModel, seed) -> ChannelRealization:
    """Draw one channel realization from ``model`` (zero delay).

    Signs are equiprobable +/-1 and magnitudes lognormal, so the expected
    total tap energy is exactly one.
    """
    rng = as_generator(seed)
    mags = np.exp(rng.normal(model.log_means(), math.sqrt(model.log_variance)))
    signs = 2 * rng.integers(0, 2, size=model.n_taps) - 1
    return ChannelRealization(signs * mags, 0.0)


def gen_delays(params: SystemParams, mode: SyncMode, seed) -> np.ndarray:
    """Per-user delays for the requested synchronism; user 1 is always 0."""
    mode = SyncMode(mode)
    rng = as_generator(seed)
    delays = np.zeros(params.n_users)
    n_int = params.n_users - 1
    if n_int == 0 or mode is SyncMode.SYMBOL_SYNC:
        return delays
    span = params.processing_gain
    if mode is SyncMode.CHIP_SYNC:
        delays[1:] = rng.integers(0, span, size=n_int) * params.chip_time
    else:
        delays[1:] = rng.uniform(0.0, span * params.chip_time, size=n_int)
    return delays


def decompose_delay(delay: float, chip_time: float = 1.0) -> tuple[int, float]:
    """Split a delay into a whole chip count and a sub-chip jitter.

    ``delay == chip_offset * chip_time + jitter`` with ``jitter`` in
    ``[0, chip_time)``; exact up to floating-point rounding.
    """
    if delay < 0:
        raise ValueError("delay must be >= 0")
    chip_offset = int(math.floor(delay / chip_time))
    jitter = delay - chip_offset * chip_time
    # guard against rounding pushing the remainder out of [0, chip_time)
    if jitter < 0.0:
        chip_offset -= 1
        jitter = delay - chip_offset * chip_time
    if jitter >= chip_time:
        chip_offset += 1
        jitter = delay - chip_offset * chip_time
        if jitter < 0.0:
            jitter = 0.0
    return chip_offset, jitter
