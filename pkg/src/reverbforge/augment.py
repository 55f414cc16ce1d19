"""Waveform-level distortion stack and composite plan machinery.

A plan is the concrete, fully-sampled composition of distortion stages for
one clip: fixed order loudness -> multi-speaker mixture -> codec -> clipping
-> additive noise, every random draw recorded. Replaying a plan against the
same corpus files reproduces bit-identical output, which is what makes the
whole dataset generation deterministic and worker-count independent.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from . import wavio
from .config import PipelineConfig
from .dsp import Waveform
from .manifest import CorpusManifest
from .rir import (
    DecayParams,
    Rir,
    attenuate_direct_and_early,
    compute_drr,
    decay_late,
    default_decay_params,
)
from .rir import apply_rir as _apply_rir

STAGE_ORDER = ("loudness", "multi_speaker", "codec", "clipping", "additive_noise")

MU_LAW_MU = 255.0


@dataclass(frozen=True)
class LoudnessParams:
    target_dbfs: float


@dataclass(frozen=True)
class CodecParams:
    bits: int


@dataclass(frozen=True)
class ClipParams:
    gamma: float


@dataclass(frozen=True)
class NoiseParams:
    noise_id: str
    snr_db: float
    offset: int  # read position into the (cyclically extended) noise clip


@dataclass(frozen=True)
class MixtureParams:
    """One interfering speaker placed in the same room as the target."""

    interferer_id: str
    rir_id: str
    drr_threshold_db: float
    sir_db: float
    decay: DecayParams
    attenuation_db: float


_PARAM_TYPES = {
    "loudness": LoudnessParams,
    "multi_speaker": MixtureParams,
    "codec": CodecParams,
    "clipping": ClipParams,
    "additive_noise": NoiseParams,
}


@dataclass(frozen=True)
class StageSpec:
    kind: str
    params: LoudnessParams | MixtureParams | CodecParams | ClipParams | NoiseParams

    def __post_init__(self) -> None:
        if self.kind not in _PARAM_TYPES:
            raise ValueError(f"unknown stage kind: {self.kind!r}")
        if not isinstance(self.params, _PARAM_TYPES[self.kind]):
            raise ValueError(f"wrong parameter record for stage {self.kind!r}")


@dataclass(frozen=True)
class AugmentationPlan:
    seed: int
    clip_samples: int
    stages: tuple[StageSpec, ...]

    def stage_kinds(self) -> list[str]:
        return [s.kind for s in self.stages]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "clip_samples": self.clip_samples,
            "stages": [
                {"kind": s.kind, "params": asdict(s.params)} for s in self.stages
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentationPlan":
        stages = []
        for s in d["stages"]:
            params = dict(s["params"])
            if s["kind"] == "multi_speaker":
                params["decay"] = DecayParams(**params["decay"])
            stages.append(StageSpec(kind=s["kind"], params=_PARAM_TYPES[s["kind"]](**params)))
        return cls(
            seed=int(d["seed"]),
            clip_samples=int(d["clip_samples"]),
            stages=tuple(stages),
        )


# ---------------------------------------------------------------------------
# Individual distortions
# ---------------------------------------------------------------------------

def rms_dbfs(s: Waveform) -> float:
    rms = float(np.sqrt(np.mean(s.samples**2)))
    if rms == 0.0:
        return -np.inf
    return 20.0 * np.log10(rms)


def scale_loudness(s: Waveform, target_dbfs: float) -> Waveform:
    """Scale so the clip's RMS sits at target_dbfs."""
    current = rms_dbfs(s)
    if not np.isfinite(current):
        raise ValueError("zero-energy clip")
    gain = 10.0 ** ((target_dbfs - current) / 20.0)
    return Waveform(samples=s.samples * gain, sample_rate_hz=s.sample_rate_hz)


def fit_length(x: np.ndarray, target_len: int, offset: int = 0) -> np.ndarray:
    """Read target_len samples starting at offset, cyclically extending.

    Covers both policies at once: a clip longer than the target is cropped
    from the offset, a shorter one is tile-looped.
    """
    if x.size == 0:
        raise ValueError("cannot fit an empty buffer")
    idx = (offset + np.arange(target_len)) % x.size
    return x[idx]


def add_noise(s: Waveform, n: Waveform, snr_db: float, offset: int = 0) -> Waveform:
    """s + g*n with g chosen so the speech-to-noise energy ratio is snr_db."""
    if s.sample_rate_hz != n.sample_rate_hz:
        raise ValueError("sample-rate mismatch between speech and noise")
    noise = fit_length(n.samples, len(s), offset)
    e_noise = float(np.sum(noise**2))
    if e_noise == 0.0:
        raise ValueError("zero-energy noise")
    e_speech = float(np.sum(s.samples**2))
    gain = np.sqrt(e_speech / (e_noise * 10.0 ** (snr_db / 10.0)))
    return Waveform(samples=s.samples + gain * noise, sample_rate_hz=s.sample_rate_hz)


def clip(s: Waveform, gamma: float) -> Waveform:
    """Hard-limit samples to [-gamma, +gamma]."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return Waveform(
        samples=np.clip(s.samples, -gamma, gamma), sample_rate_hz=s.sample_rate_hz
    )


def _mu_compress(x: np.ndarray, mu: float) -> np.ndarray:
    return np.sign(x) * np.log1p(mu * np.abs(x)) / np.log1p(mu)


def _mu_expand(y: np.ndarray, mu: float) -> np.ndarray:
    return np.sign(y) * (np.expm1(np.abs(y) * np.log1p(mu))) / mu


def codec_simulate(s: Waveform, bits: int) -> Waveform:
    """Stand-in for lossy codec artifacts: mu-law compand + uniform quantize.

    A mid-tread quantizer in the companded domain, so zero is a code level
    and at most 2^bits distinct levels appear.
    """
    if not 4 <= bits <= 12:
        raise ValueError("bits must lie in [4, 12]")
    # Companding assumes |x| <= 1; anything hotter is clamped like a real
    # codec front-end would.
    x = np.clip(s.samples, -1.0, 1.0)
    y = _mu_compress(x, MU_LAW_MU)
    half_levels = 2 ** (bits - 1) - 1  # mid-tread: levels -h..h, 2h+1 <= 2^bits
    q = np.round(y * half_levels) / half_levels
    out = _mu_expand(q, MU_LAW_MU)
    return Waveform(samples=out, sample_rate_hz=s.sample_rate_hz)


def plan_mixture_rirs(r0: Rir, p: MixtureParams) -> tuple[Rir, Rir, str]:
    """Pick the target/interferer RIR pair and which branch produced it.

    High-DRR room response (target already close to the mic): the target
    keeps r0 and the interferer gets its direct path and early reflections
    attenuated. Low-DRR response: the interferer keeps r0 verbatim and the
    target's late tail is decayed. Either way the target RIR ends up with
    the higher DRR, which is the distance cue the mixtures are built on.
    """
    drr0 = compute_drr(r0).drr_db
    if drr0 >= p.drr_threshold_db:
        target_rir = r0
        interferer_rir = attenuate_direct_and_early(r0, attenuation_db=p.attenuation_db)
        branch = "attenuate_interferer"
    else:
        interferer_rir = r0
        target_rir = decay_late(r0, p.decay)
        branch = "decay_target"
    return target_rir, interferer_rir, branch


def make_mixture(
    s1: Waveform, s2: Waveform, r0: Rir, p: MixtureParams
) -> tuple[Waveform, Waveform]:
    """Two-speaker mixture with a distance cue, plus the reverberant target.

    Returns (mixed, target): mixed = target + g*interferer with g setting
    the target-to-interferer energy ratio to p.sir_db; target is the
    reverberant s1 path, the pre-mixture reference.
    """
    if s1.sample_rate_hz != s2.sample_rate_hz:
        raise ValueError("sample-rate mismatch between speakers")
    target_rir, interferer_rir, _ = plan_mixture_rirs(r0, p)
    s2_fit = Waveform(
        samples=fit_length(s2.samples, len(s1)), sample_rate_hz=s2.sample_rate_hz
    )
    target = _apply_rir(s1, target_rir)
    interferer = _apply_rir(s2_fit, interferer_rir)
    e_target = float(np.sum(target.samples**2))
    e_interferer = float(np.sum(interferer.samples**2))
    if e_target == 0.0 or e_interferer == 0.0:
        raise ValueError("mixture requires non-silent speakers")
    gain = np.sqrt(e_target / (e_interferer * 10.0 ** (p.sir_db / 10.0)))
    mixed = Waveform(
        samples=target.samples + gain * interferer.samples,
        sample_rate_hz=s1.sample_rate_hz,
    )
    return mixed, target


# ---------------------------------------------------------------------------
# Plan sampling and application
# ---------------------------------------------------------------------------

def _require_corpus(corpora: Mapping[str, CorpusManifest], kind: str, stage: str) -> None:
    if kind not in corpora or len(corpora[kind]) == 0:
        raise ValueError(f"{kind} corpus is empty (required by stage {stage!r})")


def sample_plan(
    rng_seed: int,
    corpora: Mapping[str, CorpusManifest],
    config: PipelineConfig,
    exclude_speech_id: str | None = None,
) -> AugmentationPlan:
    """Sample one clip's composite distortion.

    Draw order is fixed so a given seed always yields the same plan:
    loudness target, then per optional stage an inclusion coin followed by
    its parameters. The mixture stage reads the chosen RIR file to size its
    decay ramp, so plans are a function of (seed, corpus contents, config).
    """
    rng = np.random.default_rng(rng_seed)
    probs = config.stage_probs
    if probs.multi_speaker > 0:
        _require_corpus(corpora, "speech", "multi_speaker")
        _require_corpus(corpora, "rir", "multi_speaker")
    if probs.additive_noise > 0:
        _require_corpus(corpora, "noise", "additive_noise")

    stages: list[StageSpec] = [
        StageSpec(
            "loudness",
            LoudnessParams(target_dbfs=float(rng.uniform(*config.loudness_db))),
        )
    ]

    if rng.random() < probs.multi_speaker:
        speech_ids = corpora["speech"].ids()
        candidates = [i for i in speech_ids if i != exclude_speech_id] or speech_ids
        interferer_id = candidates[int(rng.integers(len(candidates)))]
        rir_ids = corpora["rir"].ids()
        rir_id = rir_ids[int(rng.integers(len(rir_ids)))]
        sir_db = float(rng.uniform(*config.sir_db))
        alpha = float(rng.uniform(*config.decay_alpha))
        r0 = wavio.read_wav(corpora["rir"][rir_id].path)
        decay = default_decay_params(
            Rir(taps=r0.samples, sample_rate_hz=r0.sample_rate_hz), alpha=alpha
        )
        stages.append(
            StageSpec(
                "multi_speaker",
                MixtureParams(
                    interferer_id=interferer_id,
                    rir_id=rir_id,
                    drr_threshold_db=config.drr_threshold_db,
                    sir_db=sir_db,
                    decay=decay,
                    attenuation_db=config.attenuation_db,
                ),
            )
        )

    if rng.random() < probs.codec:
        bits = int(rng.integers(config.codec_bits[0], config.codec_bits[1] + 1))
        stages.append(StageSpec("codec", CodecParams(bits=bits)))

    if rng.random() < probs.clipping:
        gamma = float(rng.uniform(*config.clip_gamma))
        stages.append(StageSpec("clipping", ClipParams(gamma=gamma)))

    if rng.random() < probs.additive_noise:
        noise_ids = corpora["noise"].ids()
        noise_id = noise_ids[int(rng.integers(len(noise_ids)))]
        snr_db = float(rng.uniform(*config.snr_db))
        n_len = wavio.wav_frame_count(corpora["noise"][noise_id].path)
        clip_len = config.clip_samples
        if n_len > clip_len:
            offset = int(rng.integers(n_len - clip_len + 1))
        else:
            offset = int(rng.integers(n_len))
        stages.append(
            StageSpec(
                "additive_noise",
                NoiseParams(noise_id=noise_id, snr_db=snr_db, offset=offset),
            )
        )

    return AugmentationPlan(
        seed=rng_seed, clip_samples=config.clip_samples, stages=tuple(stages)
    )


def crop_or_pad(s: Waveform, n_samples: int) -> Waveform:
    """Head-crop long clips, zero-pad short ones to exactly n_samples."""
    x = s.samples
    if x.size >= n_samples:
        x = x[:n_samples]
    else:
        x = np.concatenate([x, np.zeros(n_samples - x.size)])
    return Waveform(samples=x, sample_rate_hz=s.sample_rate_hz)


def apply_plan(
    s: Waveform,
    plan: AugmentationPlan,
    corpora: Mapping[str, CorpusManifest],
) -> tuple[Waveform, Waveform]:
    """Run the plan; returns (augmented, target) sample-aligned.

    The regression target is the loudness-scaled input, except when a
    mixture stage ran, in which case it is the reverberant target-speaker
    signal from that stage (self-supervision has no anechoic reference).
    """
    working = crop_or_pad(s, plan.clip_samples)
    augmented = working
    target = working
    for stage in plan.stages:
        if stage.kind == "loudness":
            augmented = scale_loudness(augmented, stage.params.target_dbfs)
            target = augmented
        elif stage.kind == "multi_speaker":
            p = stage.params
            s2 = wavio.read_wav(corpora["speech"][p.interferer_id].path)
            r0_wav = wavio.read_wav(corpora["rir"][p.rir_id].path)
            r0 = Rir(taps=r0_wav.samples, sample_rate_hz=r0_wav.sample_rate_hz)
            augmented, target = make_mixture(augmented, s2, r0, p)
        elif stage.kind == "codec":
            augmented = codec_simulate(augmented, stage.params.bits)
        elif stage.kind == "clipping":
            augmented = clip(augmented, stage.params.gamma)
        elif stage.kind == "additive_noise":
            p = stage.params
            n = wavio.read_wav(corpora["noise"][p.noise_id].path)
            augmented = add_noise(augmented, n, p.snr_db, offset=p.offset)
    return augmented, target
