"""The three spectrogram mask species, visualized.

Saves demos/output/mask_species.png with one panel per species applied to a
synthetic magnitude spectrogram.

Run from the repository root:

    python3 demos/03_spectrogram_masks.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from reverbforge.dsp import StftConfig, Waveform, magnitude, stft
from reverbforge.specmask import (
    apply_mask,
    choose_and_apply,
    freq_mask,
    random_tf_mask,
    time_mask,
)

RATE = 16000
rng = np.random.default_rng(3)

t = np.arange(2 * RATE) / RATE
chirp = np.sin(2 * np.pi * (300 + 1200 * t) * t) * (1 + np.sin(2 * np.pi * 2 * t)) / 2
mag = magnitude(stft(Waveform(0.4 * chirp, RATE), StftConfig()))
frames, bins = mag.frames, mag.bins
print(f"spectrogram: {frames} frames x {bins} bins")

masks = {
    "time (20% of frames)": time_mask(frames, bins, 0.2, rng),
    "frequency (top band, <= 50%)": freq_mask(frames, bins, 0.5, rng),
    "random TF (75% of cells)": random_tf_mask(frames, bins, 0.75, rng),
}

fig, axes = plt.subplots(1, 3, figsize=(13, 4), sharey=True)
for ax, (title, mask) in zip(axes, masks.items()):
    masked = apply_mask(mag, mask)
    print(f"  {mask.kind}: masked fraction = {mask.masked_fraction:.4f}")
    ax.imshow(
        np.log1p(masked.values).T,
        origin="lower",
        aspect="auto",
        interpolation="nearest",
        cmap="magma",
    )
    ax.set_title(title)
    ax.set_xlabel("frame")
axes[0].set_ylabel("frequency bin")
out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig.tight_layout()
fig.savefig(out / "mask_species.png", dpi=110)
print(f"figure -> {out / 'mask_species.png'}")

print("\nspecies sampling at p = [0.1, 0.1, 0.8] over 2000 draws:")
counts = {"time": 0, "frequency": 0, "random_tf": 0}
for _ in range(2000):
    _, mask = choose_and_apply(mag, (0.1, 0.1, 0.8), rng)
    counts[mask.kind] += 1
for kind, n in counts.items():
    print(f"  {kind}: {n / 2000:.3f}")
