"""Sample-accurate waveform and time-frequency primitives.

Everything in here is a pure function of its inputs: identical inputs give
bit-identical outputs, and there is no shared mutable state, so all of it is
safe to call concurrently from worker pools.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CANONICAL_SAMPLE_RATE = 16000

# OLA sum of squared windows must be flat to this tolerance on the interior
# for synthesis to be well-posed.
COLA_TOLERANCE = 1e-6


@dataclass
class Waveform:
    """Mono time-domain sample buffer.

    Samples are float64 with a nominal range of [-1, 1]; intermediate buffers
    (mixes, convolution tails) may exceed full scale. Only WAV serialization
    clamps.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("waveform must be a non-empty 1-D sample buffer")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class StftConfig:
    """Analysis framing: canonical 32 ms window / 8 ms hop at 16 kHz."""

    window_len_samples: int = 512
    hop_samples: int = 128
    window_kind: str = "hann"

    def __post_init__(self) -> None:
        if self.window_len_samples <= 0 or self.hop_samples <= 0:
            raise ValueError("window and hop must be positive")
        if self.hop_samples > self.window_len_samples:
            raise ValueError("hop_samples must not exceed window_len_samples")
        if self.window_kind != "hann":
            raise ValueError(f"unsupported window kind: {self.window_kind!r}")

    def window(self) -> np.ndarray:
        """Periodic Hann window (COLA-compatible at hop = window/4)."""
        n = self.window_len_samples
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))

    @property
    def bins(self) -> int:
        return self.window_len_samples // 2 + 1


@dataclass
class ComplexSpectrogram:
    """STFT grid, frames x bins complex values."""

    values: np.ndarray
    config: StftConfig
    sample_rate_hz: int = CANONICAL_SAMPLE_RATE

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2:
            raise ValueError("spectrogram values must be 2-D (frames x bins)")
        if self.values.shape[1] != self.config.bins:
            raise ValueError(
                f"bin count {self.values.shape[1]} does not match config "
                f"(expected {self.config.bins})"
            )

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]


@dataclass
class MagnitudeSpectrogram:
    """Non-negative magnitude grid, optionally log1p-compressed."""

    values: np.ndarray
    compression: str = "linear"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("magnitude values must be 2-D (frames x bins)")
        if self.compression not in ("linear", "log1p"):
            raise ValueError(f"unknown compression: {self.compression!r}")
        if self.compression == "linear" and np.any(self.values < 0):
            raise ValueError("linear magnitudes must be non-negative")

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]


def frame_count(n_samples: int, cfg: StftConfig) -> int:
    """Number of STFT frames for an n-sample input.

    The tail is zero-padded to complete the final frame, so
    frames = 1 + ceil((L - W) / H); when (L - W) is a hop multiple this
    reduces to the flush-fit formula 1 + (L - W) / H.
    """
    if n_samples < cfg.window_len_samples:
        raise ValueError("insufficient samples: input shorter than one window")
    return 1 + -((n_samples - cfg.window_len_samples) // -cfg.hop_samples)


def stft(w: Waveform, cfg: StftConfig) -> ComplexSpectrogram:
    """Windowed real FFT per frame; frames x (window/2 + 1) complex grid.

    No FFT-level normalization is applied; synthesis divides by the
    overlap-added squared window, so stft -> istft is identity.
    """
    x = w.samples
    n_frames = frame_count(x.size, cfg)
    win, hop = cfg.window_len_samples, cfg.hop_samples
    padded_len = win + (n_frames - 1) * hop
    if padded_len > x.size:
        x = np.concatenate([x, np.zeros(padded_len - x.size)])
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = x[idx] * cfg.window()[None, :]
    return ComplexSpectrogram(
        values=np.fft.rfft(frames, axis=1),
        config=cfg,
        sample_rate_hz=w.sample_rate_hz,
    )


def _ola_window_sq(cfg: StftConfig, n_frames: int) -> np.ndarray:
    """Per-sample overlap-added squared window for an n_frames layout."""
    win, hop = cfg.window_len_samples, cfg.hop_samples
    wsq = cfg.window() ** 2
    out = np.zeros(win + (n_frames - 1) * hop)
    for f in range(n_frames):
        out[f * hop : f * hop + win] += wsq
    return out


def check_cola(cfg: StftConfig, tolerance: float = COLA_TOLERANCE) -> bool:
    """True when the squared window overlap-adds to a constant (interior)."""
    win = cfg.window_len_samples
    n_frames = 3 * (win // cfg.hop_samples) + 3
    ola = _ola_window_sq(cfg, n_frames)
    interior = ola[win:-win]
    if interior.size == 0:
        return False
    return bool(np.ptp(interior) <= tolerance)


def cola_constant(cfg: StftConfig) -> float:
    """Interior value of the overlap-added squared window (1.5 canonically)."""
    win = cfg.window_len_samples
    n_frames = 3 * (win // cfg.hop_samples) + 3
    return float(_ola_window_sq(cfg, n_frames)[win])


def istft(spec: ComplexSpectrogram, length: int | None = None) -> Waveform:
    """Weighted overlap-add synthesis, inverse of stft on the interior.

    Raises if the config does not satisfy the COLA property. The output spans
    the padded analysis length, window + (frames-1) * hop; pass `length` to
    crop/zero-pad to an exact sample count.
    """
    cfg = spec.config
    if not check_cola(cfg):
        raise ValueError(
            "config does not satisfy constant-overlap-add; cannot invert"
        )
    win, hop = cfg.window_len_samples, cfg.hop_samples
    n_frames = spec.frames
    frames = np.fft.irfft(spec.values, n=win, axis=1) * cfg.window()[None, :]
    out = np.zeros(win + (n_frames - 1) * hop)
    for f in range(n_frames):
        out[f * hop : f * hop + win] += frames[f]
    wsum = _ola_window_sq(cfg, n_frames)
    # First/last samples have near-zero window coverage; leave them silent.
    live = wsum > 1e-10
    out[live] /= wsum[live]
    out[~live] = 0.0
    if length is not None:
        if length <= 0:
            raise ValueError("length must be positive")
        if length <= out.size:
            out = out[:length]
        else:
            out = np.concatenate([out, np.zeros(length - out.size)])
    return Waveform(samples=out, sample_rate_hz=spec.sample_rate_hz)


def magnitude(spec: ComplexSpectrogram) -> MagnitudeSpectrogram:
    """Elementwise |.| of the complex grid; linear compression."""
    return MagnitudeSpectrogram(values=np.abs(spec.values), compression="linear")


def log1p_compress(m: MagnitudeSpectrogram) -> MagnitudeSpectrogram:
    """ln(1 + x) per bin. Input must be linear."""
    if m.compression != "linear":
        raise ValueError("log1p_compress expects linear magnitudes")
    return MagnitudeSpectrogram(values=np.log1p(m.values), compression="log1p")


def log1p_expand(m: MagnitudeSpectrogram) -> MagnitudeSpectrogram:
    """exp(x) - 1 per bin, inverse of log1p_compress."""
    if m.compression != "log1p":
        raise ValueError("log1p_expand expects log1p-compressed magnitudes")
    return MagnitudeSpectrogram(values=np.expm1(m.values), compression="linear")
