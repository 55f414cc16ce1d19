"""Reference-based quality measures: segmental SNR and global SNR."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import Waveform


@dataclass(frozen=True)
class SsnrConfig:
    """Segmental-SNR framing and clamping.

    32 ms frames with 16 ms hop at 16 kHz, per-frame values clamped to
    [-10, 35] dB, frames whose reference RMS falls below -40 dBFS excluded.
    """

    frame_len_samples: int = 512
    hop_samples: int = 256
    floor_db: float = -10.0
    ceil_db: float = 35.0
    silence_threshold_dbfs: float = -40.0

    def __post_init__(self) -> None:
        if self.frame_len_samples <= 0 or self.hop_samples <= 0:
            raise ValueError("frame and hop must be positive")
        if self.floor_db >= self.ceil_db:
            raise ValueError("floor_db must be below ceil_db")


def _as_samples(x: Waveform | np.ndarray) -> np.ndarray:
    if isinstance(x, Waveform):
        return x.samples
    return np.asarray(x, dtype=np.float64)


def ssnr(
    reference: Waveform,
    estimate: Waveform,
    cfg: SsnrConfig = SsnrConfig(),
) -> float:
    """Mean of clamped per-frame SNRs over non-silent reference frames.

    Note the silence gate is absolute (-40 dBFS), so joint rescaling of
    reference and estimate only preserves the score while no frame crosses
    the gate; exact-zero silence is always safe.
    """
    if len(reference) != len(estimate):
        raise ValueError("reference and estimate lengths differ")
    if reference.sample_rate_hz != estimate.sample_rate_hz:
        raise ValueError("reference and estimate sample rates differ")
    ref = reference.samples
    err = ref - estimate.samples
    flen, hop = cfg.frame_len_samples, cfg.hop_samples
    if len(ref) < flen:
        raise ValueError("input shorter than one segmental frame")
    silence_gate = flen * 10.0 ** (cfg.silence_threshold_dbfs / 10.0)

    per_frame = []
    for start in range(0, len(ref) - flen + 1, hop):
        e_ref = float(np.sum(ref[start : start + flen] ** 2))
        if e_ref < silence_gate:
            continue
        e_err = float(np.sum(err[start : start + flen] ** 2))
        if e_err == 0.0:
            val = cfg.ceil_db
        else:
            val = 10.0 * np.log10(e_ref / e_err)
        per_frame.append(min(max(val, cfg.floor_db), cfg.ceil_db))
    if not per_frame:
        raise ValueError("no frames above the silence threshold")
    return float(np.mean(per_frame))


def snr_global(
    reference: Waveform | np.ndarray, estimate: Waveform | np.ndarray
) -> float:
    """10*log10(sum(ref^2) / sum((ref - est)^2)); +inf for identical inputs."""
    ref = _as_samples(reference)
    est = _as_samples(estimate)
    if ref.shape != est.shape:
        raise ValueError("reference and estimate lengths differ")
    e_ref = float(np.sum(ref**2))
    if e_ref == 0.0:
        raise ValueError("zero reference energy")
    e_err = float(np.sum((ref - est) ** 2))
    if e_err == 0.0:
        return np.inf
    return float(10.0 * np.log10(e_ref / e_err))
