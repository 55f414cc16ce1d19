"""Spectrogram-level masking: time, frequency, and random TF species.

Masks are binary keep/drop grids applied as an elementwise product with the
magnitude spectrogram. Exactly one species is drawn per clip.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import MagnitudeSpectrogram

KINDS = ("time", "frequency", "random_tf")

# Masked share per species (fraction of frames, max fraction of bins,
# fraction of TF cells respectively).
DEFAULT_TIME_FRACTION = 0.2
DEFAULT_FREQ_MAX_FRACTION = 0.5
DEFAULT_TF_FRACTION = 0.75


@dataclass
class SpectroMask:
    """Binary frames x bins grid; 1 = keep, 0 = masked."""

    kind: str
    grid: np.ndarray
    masked_fraction: float = field(init=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown mask kind: {self.kind!r}")
        self.grid = np.asarray(self.grid, dtype=np.uint8)
        if self.grid.ndim != 2:
            raise ValueError("mask grid must be 2-D (frames x bins)")
        if not np.isin(self.grid, (0, 1)).all():
            raise ValueError("mask grid must be binary")
        self.masked_fraction = float(
            np.count_nonzero(self.grid == 0) / self.grid.size
        )

    @property
    def frames(self) -> int:
        return self.grid.shape[0]

    @property
    def bins(self) -> int:
        return self.grid.shape[1]


def time_mask(
    frames: int, bins: int, fraction: float, rng: np.random.Generator
) -> SpectroMask:
    """Zero exactly floor(fraction * frames) whole frames, chosen uniformly."""
    _check_fraction(fraction)
    k = int(np.floor(fraction * frames))
    grid = np.ones((frames, bins), dtype=np.uint8)
    if k > 0:
        chosen = rng.choice(frames, size=k, replace=False)
        grid[chosen, :] = 0
    return SpectroMask(kind="time", grid=grid)


def freq_mask(
    frames: int, bins: int, max_fraction: float, rng: np.random.Generator
) -> SpectroMask:
    """Zero a contiguous band of the k highest bins, k ~ U[1, floor(max_fraction*bins)].

    Mimics bandwidth limitation: the band is anchored at the top of the
    spectrum, so DC and low bins are never touched. max_fraction small
    enough that floor(max_fraction*bins) = 0 yields an identity mask.
    """
    _check_fraction(max_fraction)
    k_max = int(np.floor(max_fraction * bins))
    grid = np.ones((frames, bins), dtype=np.uint8)
    if k_max >= 1:
        k = int(rng.integers(1, k_max + 1))
        grid[:, bins - k :] = 0
    return SpectroMask(kind="frequency", grid=grid)


def random_tf_mask(
    frames: int, bins: int, fraction: float, rng: np.random.Generator
) -> SpectroMask:
    """Zero exactly floor(fraction * frames * bins) cells, uniformly without replacement."""
    _check_fraction(fraction)
    total = frames * bins
    k = int(np.floor(fraction * total))
    grid = np.ones(total, dtype=np.uint8)
    if k > 0:
        chosen = rng.permutation(total)[:k]
        grid[chosen] = 0
    return SpectroMask(kind="random_tf", grid=grid.reshape(frames, bins))


def apply_mask(m: MagnitudeSpectrogram, mask: SpectroMask) -> MagnitudeSpectrogram:
    """Elementwise product; masked cells become exact zeros."""
    if m.values.shape != mask.grid.shape:
        raise ValueError("mask shape does not match spectrogram")
    return MagnitudeSpectrogram(
        values=m.values * mask.grid, compression=m.compression
    )


def choose_and_apply(
    m: MagnitudeSpectrogram,
    probs: tuple[float, float, float],
    rng: np.random.Generator,
    time_fraction: float = DEFAULT_TIME_FRACTION,
    freq_max_fraction: float = DEFAULT_FREQ_MAX_FRACTION,
    tf_fraction: float = DEFAULT_TF_FRACTION,
) -> tuple[MagnitudeSpectrogram, SpectroMask]:
    """Draw one mask species with probs = [p_time, p_freq, p_tf] and apply it."""
    if len(probs) != 3:
        raise ValueError("probs must have three entries")
    if abs(sum(probs) - 1.0) > 1e-9:
        raise ValueError("mask species probabilities must sum to 1")
    kind = KINDS[int(rng.choice(3, p=list(probs)))]
    if kind == "time":
        mask = time_mask(m.frames, m.bins, time_fraction, rng)
    elif kind == "frequency":
        mask = freq_mask(m.frames, m.bins, freq_max_fraction, rng)
    else:
        mask = random_tf_mask(m.frames, m.bins, tf_fraction, rng)
    return apply_mask(m, mask), mask


def _check_fraction(fraction: float) -> None:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
