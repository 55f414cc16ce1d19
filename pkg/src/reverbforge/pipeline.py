"""Deterministic batch generation: the operational shell around the math.

Every clip's randomness flows from a stable per-clip seed derived by hashing
(global seed, clip index, clip id), so output is a pure function of config,
manifests and corpus file contents, and independent of worker count and
scheduling. Per-clip failures are recorded in the index and do not abort
the batch.
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import wavio
from .augment import AugmentationPlan, apply_plan, sample_plan
from .config import PipelineConfig
from .dsp import log1p_compress, magnitude, stft
from .manifest import CorpusManifest
from .specmask import choose_and_apply
from .tensorio import mask_to_rle, tensor_bytes

log = logging.getLogger(__name__)


def derive_clip_seed(global_seed: int, clip_index: int, clip_id: str, stream: str = "plan") -> int:
    """Stable 64-bit seed from (global seed, clip index, clip id, stream).

    SHA-256 based so it is reproducible across processes, platforms and
    partial regenerations; `stream` separates the plan RNG from the
    spectrogram-mask RNG.
    """
    key = f"{global_seed}:{clip_index}:{clip_id}:{stream}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def _sha256(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


@dataclass
class ClipResult:
    index: int
    clip_id: str
    seed_plan: int
    seed_mask: int
    status: str = "ok"
    error: str | None = None
    artifacts: dict[str, dict[str, str]] = field(default_factory=dict)
    clipped_samples: dict[str, int] = field(default_factory=dict)
    plan_summary: dict | None = None

    def to_record(self) -> dict:
        rec = {
            "index": self.index,
            "clip_id": self.clip_id,
            "seed_plan": self.seed_plan,
            "seed_mask": self.seed_mask,
            "status": self.status,
            "artifacts": self.artifacts,
            "clipped_samples": self.clipped_samples,
            "plan_summary": self.plan_summary,
        }
        if self.error is not None:
            rec["error"] = self.error
        return rec


@dataclass
class BatchResult:
    out_dir: Path
    index_path: Path
    results: list[ClipResult]

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.results if r.status != "ok")


def _render_clip(
    config: PipelineConfig,
    manifests: Mapping[str, CorpusManifest],
    clip_index: int,
    clip_id: str,
) -> tuple[ClipResult, dict[str, bytes]]:
    """Compute one clip's artifacts fully in memory."""
    seed_plan = derive_clip_seed(config.seed, clip_index, clip_id, "plan")
    seed_mask = derive_clip_seed(config.seed, clip_index, clip_id, "mask")
    result = ClipResult(
        index=clip_index, clip_id=clip_id, seed_plan=seed_plan, seed_mask=seed_mask
    )
    entry = manifests["speech"][clip_id]
    speech = wavio.read_wav(entry.path)
    if speech.sample_rate_hz != config.sample_rate_hz:
        raise ValueError(
            f"{clip_id}: sample rate {speech.sample_rate_hz} != pipeline rate "
            f"{config.sample_rate_hz}"
        )
    plan = sample_plan(seed_plan, manifests, config, exclude_speech_id=clip_id)
    augmented, target = apply_plan(speech, plan, manifests)

    spec = stft(augmented, config.stft)
    mag = magnitude(spec)
    if config.compression == "log1p":
        mag = log1p_compress(mag)
    mask_rng = np.random.default_rng(seed_mask)
    masked, mask = choose_and_apply(
        mag,
        config.spectro_probs,
        mask_rng,
        time_fraction=config.time_mask_fraction,
        freq_max_fraction=config.freq_mask_max_fraction,
        tf_fraction=config.tf_mask_fraction,
    )

    aug_bytes, aug_clipped = wavio.wav_bytes(augmented)
    tgt_bytes, tgt_clipped = wavio.wav_bytes(target)
    masked_bytes = tensor_bytes(masked.values)
    rle_bytes = (json.dumps(mask_to_rle(mask), sort_keys=True) + "\n").encode()
    plan_bytes = (json.dumps(plan.to_dict(), sort_keys=True) + "\n").encode()

    base = f"{clip_index:05d}_{clip_id}"
    payloads = {
        f"{base}_augmented.wav": aug_bytes,
        f"{base}_target.wav": tgt_bytes,
        f"{base}_masked.f32": masked_bytes,
        f"{base}_mask.json": rle_bytes,
        f"{base}_plan.json": plan_bytes,
    }
    roles = {
        "augmented_wav": f"{base}_augmented.wav",
        "target_wav": f"{base}_target.wav",
        "masked_tensor": f"{base}_masked.f32",
        "mask_rle": f"{base}_mask.json",
        "plan": f"{base}_plan.json",
    }
    result.artifacts = {
        role: {"path": name, "sha256": _sha256(payloads[name])}
        for role, name in roles.items()
    }
    result.clipped_samples = {"augmented": aug_clipped, "target": tgt_clipped}
    result.plan_summary = {
        "stages": plan.stage_kinds(),
        "mask_kind": mask.kind,
        "mask_fraction": mask.masked_fraction,
    }
    return result, payloads


def _run_one(
    config: PipelineConfig,
    manifests: Mapping[str, CorpusManifest],
    clip_index: int,
    clip_id: str,
    out_dir: Path,
) -> ClipResult:
    seed_plan = derive_clip_seed(config.seed, clip_index, clip_id, "plan")
    seed_mask = derive_clip_seed(config.seed, clip_index, clip_id, "mask")
    try:
        result, payloads = _render_clip(config, manifests, clip_index, clip_id)
    except Exception as exc:  # fail-soft: one bad file never kills the batch
        log.warning("clip %d (%s) failed: %s", clip_index, clip_id, exc)
        return ClipResult(
            index=clip_index,
            clip_id=clip_id,
            seed_plan=seed_plan,
            seed_mask=seed_mask,
            status="error",
            error=str(exc),
        )
    for name, payload in payloads.items():
        (out_dir / name).write_bytes(payload)
    return result


def generate_batch(
    config: PipelineConfig,
    manifests: Mapping[str, CorpusManifest],
    count: int,
    out_dir: str | Path | None = None,
    workers: int = 1,
) -> BatchResult:
    """Generate `count` artifact groups plus an index listing all of them.

    Speech clips are taken round-robin from the speech manifest. The index
    is line-delimited JSON, one record per clip in index order, each naming
    every artifact with its SHA-256.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if "speech" not in manifests or len(manifests["speech"]) == 0:
        raise ValueError("speech corpus is empty")
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    speech_ids = manifests["speech"].ids()
    jobs = [(i, speech_ids[i % len(speech_ids)]) for i in range(count)]
    if workers == 1:
        results = [_run_one(config, manifests, i, cid, out) for i, cid in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_one, config, manifests, i, cid, out)
                for i, cid in jobs
            ]
            results = [f.result() for f in futures]
    results.sort(key=lambda r: r.index)

    index_path = out / "index.jsonl"
    with open(index_path, "w") as f:
        for r in results:
            f.write(json.dumps(r.to_record(), sort_keys=True) + "\n")
    return BatchResult(out_dir=out, index_path=index_path, results=results)


def load_index(path: str | Path) -> list[dict]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records


def replay_plan(plan_path: str | Path) -> AugmentationPlan:
    return AugmentationPlan.from_dict(json.loads(Path(plan_path).read_text()))
