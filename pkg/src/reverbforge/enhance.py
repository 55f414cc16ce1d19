"""TF-mask enhancement mechanics: mask application, oracle IRM, features.

No trainable enhancement network lives here; the module delivers the mask
semantics (a [0, 1] gain per TF cell multiplied onto the noisy STFT, noisy
phase reused for resynthesis), the oracle ideal ratio mask, and the
embedding-plus-magnitude feature grid a finetuning head would consume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import ComplexSpectrogram, MagnitudeSpectrogram
from .mae import PatchGrid

DEFAULT_IRM_EPS = 1e-8


@dataclass
class TfMask:
    """Real frames x bins gain grid bounded to [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("TF mask must be 2-D (frames x bins)")
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise ValueError("TF mask values must lie in [0, 1]")

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]


def apply_tf_mask(noisy: ComplexSpectrogram, mask: TfMask) -> ComplexSpectrogram:
    """Scale each noisy TF cell by the mask gain; phase carries over.

    Multiplying the complex value by a non-negative real leaves its argument
    untouched, so the noisy phase is what drives resynthesis.
    """
    if noisy.values.shape != mask.values.shape:
        raise ValueError("mask shape does not match spectrogram")
    return ComplexSpectrogram(
        values=noisy.values * mask.values,
        config=noisy.config,
        sample_rate_hz=noisy.sample_rate_hz,
    )


def oracle_irm(
    clean: MagnitudeSpectrogram,
    noisy: MagnitudeSpectrogram,
    eps: float = DEFAULT_IRM_EPS,
) -> TfMask:
    """Ideal ratio mask min(1, clean / (noisy + eps)): the oracle share of
    clean speech in each TF cell."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if clean.values.shape != noisy.values.shape:
        raise ValueError("clean and noisy spectrogram shapes differ")
    if clean.compression != "linear" or noisy.compression != "linear":
        raise ValueError("oracle IRM expects linear magnitudes")
    return TfMask(values=np.minimum(1.0, clean.values / (noisy.values + eps)))


def embed_concat(
    embeddings: np.ndarray,
    patches: PatchGrid,
    noisy_mag: MagnitudeSpectrogram,
) -> np.ndarray:
    """Per-frame [embedding | magnitude row] feature grid.

    Patch embeddings (one vector per patch of `patches`) are pooled over the
    bin blocks covering each frame and broadcast across that patch's frame
    span; tail frames the patch crop dropped borrow the nearest covered
    block. A drift beyond one patch span between embedding coverage and the
    magnitude grid means the inputs do not belong together.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.shape[0] != patches.n_patches:
        raise ValueError("one embedding per patch required")
    frames = noisy_mag.frames
    covered = patches.covered_frames
    if abs(frames - covered) > patches.patch_w:
        raise ValueError(
            f"frame counts irreconcilable: {frames} magnitude frames vs "
            f"{covered} covered by embeddings"
        )
    d = embeddings.shape[1]
    # Pool over bin blocks: embeddings are ordered (frame block, bin block).
    per_block = embeddings.reshape(patches.block_rows, patches.block_cols, d).mean(axis=1)
    per_frame = np.repeat(per_block, patches.patch_w, axis=0)
    if frames <= per_frame.shape[0]:
        per_frame = per_frame[:frames]
    else:
        tail = np.tile(per_frame[-1], (frames - per_frame.shape[0], 1))
        per_frame = np.vstack([per_frame, tail])
    return np.hstack([per_frame, noisy_mag.values])
