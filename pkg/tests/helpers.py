"""Shared synthetic-signal builders for the test suite."""

import numpy as np

from reverbforge.dsp import Waveform
from reverbforge.rir import Rir

RATE = 16000


def speech_like(rng, n_samples, rate=RATE):
    """Amplitude-modulated harmonic bursts with pauses; crudely speech-shaped."""
    t = np.arange(n_samples) / rate
    f0 = rng.uniform(90, 220)
    x = np.zeros(n_samples)
    for k in range(1, 6):
        x += np.sin(2 * np.pi * k * f0 * t + rng.uniform(0, 2 * np.pi)) / k
    envelope = 0.5 * (1 + np.sin(2 * np.pi * rng.uniform(1.5, 4.0) * t))
    gate = (np.sin(2 * np.pi * rng.uniform(0.4, 0.9) * t + rng.uniform(0, 2 * np.pi)) > -0.7)
    x = x * envelope * gate + 0.01 * rng.normal(size=n_samples)
    x *= 0.3 / np.max(np.abs(x))
    return Waveform(samples=x, sample_rate_hz=rate)


def diffuse_rir(rng, rate=RATE, duration_s=0.25, direct_gain=1.0, tail_gain=0.1,
                decay_s=0.08, direct_at=40, early_gain=(0.1, 0.4)):
    """Synthetic room response: direct peak, sparse early taps, diffuse tail.

    direct_gain/tail_gain steer the DRR; the tail is exponentially decaying
    Gaussian noise, so no solitary late reflection dominates.
    """
    n = int(duration_s * rate)
    taps = np.zeros(n)
    taps[direct_at] = direct_gain
    for _ in range(4):
        pos = direct_at + int(rng.uniform(0.003, 0.04) * rate)
        taps[pos] += rng.uniform(*early_gain) * direct_gain * rng.choice([-1, 1])
    t = np.arange(n) / rate
    tail_start = direct_at + int(0.05 * rate)
    tail = rng.normal(size=n) * np.exp(-(t - t[tail_start]) / decay_s)
    tail[:tail_start] = 0.0
    taps += tail_gain * tail
    return Rir(taps=taps, sample_rate_hz=rate)


def high_drr_rir(rng, rate=RATE):
    """Strong direct path, weak tail: lands well above a 0 dB threshold."""
    return diffuse_rir(
        rng, rate=rate, direct_gain=1.0,
        tail_gain=rng.uniform(0.005, 0.02), early_gain=(0.05, 0.2),
    )


def low_drr_rir(rng, rate=RATE):
    """Direct path kept as the peak tap but buried in a strong diffuse tail."""
    return diffuse_rir(
        rng, rate=rate, direct_gain=1.0, tail_gain=rng.uniform(0.06, 0.09),
    )
