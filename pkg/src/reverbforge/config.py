"""Pipeline configuration: JSON key-value file, unknown keys rejected."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .dsp import StftConfig


@dataclass(frozen=True)
class StageProbs:
    """Inclusion probability per optional waveform stage (loudness always runs)."""

    multi_speaker: float = 0.5
    codec: float = 0.5
    clipping: float = 0.5
    additive_noise: float = 0.5

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"stage probability {f.name} must be in [0, 1]")


def _check_range(name: str, lo: float, hi: float) -> None:
    if lo > hi:
        raise ValueError(f"{name} range is inverted: [{lo}, {hi}]")


@dataclass
class PipelineConfig:
    seed: int = 0
    clip_seconds: float = 4.0
    sample_rate_hz: int = 16000
    stft: StftConfig = field(default_factory=StftConfig)
    stage_probs: StageProbs = field(default_factory=StageProbs)
    loudness_db: tuple[float, float] = (-30.0, 10.0)
    snr_db: tuple[float, float] = (-30.0, 0.0)
    sir_db: tuple[float, float] = (0.0, 10.0)
    clip_gamma: tuple[float, float] = (0.0, 1.0)
    codec_bits: tuple[int, int] = (4, 12)
    drr_threshold_db: float = 0.0
    decay_alpha: tuple[float, float] = (0.1, 0.5)
    attenuation_db: float = 15.0
    spectro_probs: tuple[float, float, float] = (0.1, 0.1, 0.8)
    time_mask_fraction: float = 0.2
    freq_mask_max_fraction: float = 0.5
    tf_mask_fraction: float = 0.75
    compression: str = "linear"
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if self.clip_seconds <= 0:
            raise ValueError("clip_seconds must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        _check_range("loudness_db", *self.loudness_db)
        _check_range("snr_db", *self.snr_db)
        _check_range("sir_db", *self.sir_db)
        _check_range("clip_gamma", *self.clip_gamma)
        _check_range("codec_bits", *self.codec_bits)
        _check_range("decay_alpha", *self.decay_alpha)
        if self.clip_gamma[0] < 0.0 or self.clip_gamma[1] > 1.0:
            raise ValueError("clip_gamma range must lie inside [0, 1]")
        if self.decay_alpha[0] < 0.0 or self.decay_alpha[1] > 1.0:
            raise ValueError("decay_alpha range must lie inside [0, 1]")
        if len(self.spectro_probs) != 3 or any(
            not 0.0 <= p <= 1.0 for p in self.spectro_probs
        ):
            raise ValueError("spectro_probs must be three probabilities")
        if abs(sum(self.spectro_probs) - 1.0) > 1e-9:
            raise ValueError("spectro_probs must sum to 1")
        for name in ("time_mask_fraction", "freq_mask_max_fraction", "tf_mask_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.compression not in ("linear", "log1p"):
            raise ValueError(f"unknown compression: {self.compression!r}")
        if self.attenuation_db < 0:
            raise ValueError("attenuation_db must be non-negative")

    @property
    def clip_samples(self) -> int:
        return round(self.clip_seconds * self.sample_rate_hz)


def _from_dict(path_label: str, data: dict) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    unknown = data.keys() - known
    if unknown:
        raise ValueError(f"{path_label}: unknown config keys {sorted(unknown)}")
    kwargs: dict = dict(data)
    if "stft" in kwargs:
        stft = kwargs["stft"]
        stft_known = {"window_len_samples", "hop_samples", "window_kind"}
        stft_unknown = stft.keys() - stft_known
        if stft_unknown:
            raise ValueError(f"{path_label}: unknown stft keys {sorted(stft_unknown)}")
        kwargs["stft"] = StftConfig(**stft)
    if "stage_probs" in kwargs:
        probs = kwargs["stage_probs"]
        probs_known = {"multi_speaker", "codec", "clipping", "additive_noise"}
        probs_unknown = probs.keys() - probs_known
        if probs_unknown:
            raise ValueError(
                f"{path_label}: unknown stage_probs keys {sorted(probs_unknown)}"
            )
        kwargs["stage_probs"] = StageProbs(**probs)
    for name in (
        "loudness_db",
        "snr_db",
        "sir_db",
        "clip_gamma",
        "codec_bits",
        "decay_alpha",
        "spectro_probs",
    ):
        if name in kwargs:
            kwargs[name] = tuple(kwargs[name])
    return PipelineConfig(**kwargs)


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    data = json.loads(path.read_text())
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return _from_dict(str(path), data)


def config_to_dict(cfg: PipelineConfig) -> dict:
    return {
        "seed": cfg.seed,
        "clip_seconds": cfg.clip_seconds,
        "sample_rate_hz": cfg.sample_rate_hz,
        "stft": {
            "window_len_samples": cfg.stft.window_len_samples,
            "hop_samples": cfg.stft.hop_samples,
            "window_kind": cfg.stft.window_kind,
        },
        "stage_probs": {
            "multi_speaker": cfg.stage_probs.multi_speaker,
            "codec": cfg.stage_probs.codec,
            "clipping": cfg.stage_probs.clipping,
            "additive_noise": cfg.stage_probs.additive_noise,
        },
        "loudness_db": list(cfg.loudness_db),
        "snr_db": list(cfg.snr_db),
        "sir_db": list(cfg.sir_db),
        "clip_gamma": list(cfg.clip_gamma),
        "codec_bits": list(cfg.codec_bits),
        "drr_threshold_db": cfg.drr_threshold_db,
        "decay_alpha": list(cfg.decay_alpha),
        "attenuation_db": cfg.attenuation_db,
        "spectro_probs": list(cfg.spectro_probs),
        "time_mask_fraction": cfg.time_mask_fraction,
        "freq_mask_max_fraction": cfg.freq_mask_max_fraction,
        "tf_mask_fraction": cfg.tf_mask_fraction,
        "compression": cfg.compression,
        "output_dir": cfg.output_dir,
    }
