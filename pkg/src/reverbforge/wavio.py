"""Mono 16-bit PCM WAV reading and writing via the stdlib wave module."""
from __future__ import annotations

import io
import wave
from pathlib import Path

import numpy as np

from .dsp import Waveform

# Same scale on read and write so the round-trip error stays within half a
# quantization step; +1.0 alone saturates to 32767.
_FULL_SCALE = 32768.0


def read_wav(path: str | Path) -> Waveform:
    """Read a mono 16-bit PCM WAV into float64 samples in [-1, 1]."""
    with wave.open(str(path), "rb") as f:
        if f.getnchannels() != 1:
            raise ValueError(f"{path}: mono WAV required, got {f.getnchannels()} channels")
        if f.getsampwidth() != 2:
            raise ValueError(
                f"{path}: 16-bit PCM required, got {8 * f.getsampwidth()}-bit"
            )
        rate = f.getframerate()
        raw = f.readframes(f.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / _FULL_SCALE
    if samples.size == 0:
        raise ValueError(f"{path}: empty WAV")
    return Waveform(samples=samples, sample_rate_hz=rate)


def wav_bytes(w: Waveform) -> tuple[bytes, int]:
    """Serialize to 16-bit PCM mono bytes, clamping to [-1, 1].

    Returns (payload, number of samples that had to be clamped).
    """
    x = w.samples
    n_clipped = int(np.count_nonzero(np.abs(x) > 1.0))
    ints = np.clip(np.round(np.clip(x, -1.0, 1.0) * _FULL_SCALE), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate_hz)
        f.writeframes(ints.tobytes())
    return buf.getvalue(), n_clipped


def write_wav(path: str | Path, w: Waveform) -> int:
    """Write 16-bit PCM mono, clamping to [-1, 1].

    Returns the number of samples that had to be clamped.
    """
    payload, n_clipped = wav_bytes(w)
    Path(path).write_bytes(payload)
    return n_clipped


def wav_frame_count(path: str | Path) -> int:
    """Sample count from the WAV header, without decoding the payload."""
    with wave.open(str(path), "rb") as f:
        return f.getnframes()


def wav_sample_rate(path: str | Path) -> int:
    with wave.open(str(path), "rb") as f:
        return f.getframerate()
