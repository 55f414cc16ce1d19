"""Walk through each waveform-level distortion and measure what it does.

Run from the repository root:

    python3 demos/01_waveform_distortions.py
"""

import numpy as np

from reverbforge.augment import (
    add_noise,
    clip,
    codec_simulate,
    rms_dbfs,
    scale_loudness,
)
from reverbforge.dsp import Waveform
from reverbforge.metrics import snr_global

RATE = 16000

rng = np.random.default_rng(0)
t = np.arange(2 * RATE) / RATE
speech = Waveform(0.4 * np.sin(2 * np.pi * 220 * t) * (1 + 0.5 * np.sin(2 * np.pi * 3 * t)), RATE)

print("== loudness scaling ==")
print(f"input RMS: {rms_dbfs(speech):.2f} dBFS")
for target in (-30.0, -12.0, 10.0):
    scaled = scale_loudness(speech, target)
    print(f"  scaled to {target:+.1f} dBFS -> measured {rms_dbfs(scaled):+.3f} dBFS")

print("\n== additive noise at a requested SNR ==")
noise = Waveform(rng.normal(0, 0.1, 3 * RATE), RATE)
for snr in (-30.0, -10.0, 0.0):
    noisy = add_noise(speech, noise, snr, offset=500)
    print(f"  requested {snr:+.0f} dB -> realized {snr_global(speech, noisy):+.4f} dB")

print("\n== hard clipping: d(s) = max(min(s, g), -g) ==")
for gamma in (1.0, 0.5, 0.2):
    clipped = clip(speech, gamma)
    changed = np.count_nonzero(clipped.samples != speech.samples)
    print(f"  gamma = {gamma}: {changed} of {len(speech)} samples limited, "
          f"peak {np.max(np.abs(clipped.samples)):.3f}")

print("\n== codec artifacts: mu-law compand + uniform quantize ==")
for bits in (4, 8, 12):
    coded = codec_simulate(speech, bits)
    print(f"  {bits:2d} bits -> distortion SNR {snr_global(speech, coded):6.2f} dB")

print("\nLower bit depths trade fidelity for audible codec grit; the "
      "augmentation plan samples bits uniformly from the configured range.")
