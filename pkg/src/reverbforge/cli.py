"""Command-line interface.

Subcommands: generate, inspect, train-toy, enhance, score, validate-manifest.
Exit codes: 0 success, 1 failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import wavio
from .augment import plan_mixture_rirs, sample_plan
from .config import PipelineConfig, load_config
from .dsp import (
    MagnitudeSpectrogram,
    frame_count,
    istft,
    log1p_compress,
    magnitude,
    stft,
)
from .enhance import TfMask, apply_tf_mask, oracle_irm
from .mae import build_masked_batch, forward, init_model, save_checkpoint, train
from .manifest import CorpusManifest, ManifestError, load_manifest
from .metrics import ssnr
from .pipeline import derive_clip_seed, generate_batch, load_index
from .rir import Rir, compute_drr
from .specmask import SpectroMask, choose_and_apply
from .tensorio import read_mask_rle, read_tensor

log = logging.getLogger(__name__)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument(
        "--manifest",
        action="append",
        default=[],
        metavar="KIND=PATH",
        help="corpus manifest, repeatable (speech=..., noise=..., rir=...)",
    )
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--log-level", default="warning")


def _load_setup(args) -> tuple[PipelineConfig, dict[str, CorpusManifest]]:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    manifests: dict[str, CorpusManifest] = {}
    for spec in args.manifest:
        if "=" not in spec:
            raise ValueError(f"--manifest expects KIND=PATH, got {spec!r}")
        kind, path = spec.split("=", 1)
        if kind not in ("speech", "noise", "rir"):
            raise ValueError(f"unknown manifest kind {kind!r}")
        if kind in manifests:
            raise ValueError(f"duplicate manifest kind {kind!r}")
        manifests[kind] = load_manifest(
            path, pipeline_rate_hz=config.sample_rate_hz, expect_kind=kind
        )
    return config, manifests


def _cmd_generate(args) -> int:
    config, manifests = _load_setup(args)
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("REVERBFORGE_WORKERS", "1"))
    result = generate_batch(
        config, manifests, args.count, out_dir=args.out, workers=workers
    )
    for r in result.results:
        if r.status != "ok":
            print(f"clip {r.index} ({r.clip_id}): ERROR {r.error}", file=sys.stderr)
    print(
        f"generated {len(result.results) - result.n_failed}/{len(result.results)} "
        f"clips -> {result.index_path}"
    )
    return 1 if result.n_failed else 0


def _cmd_inspect(args) -> int:
    config, manifests = _load_setup(args)
    if "speech" not in manifests:
        raise ValueError("inspect requires a speech manifest")
    speech_ids = manifests["speech"].ids()
    if args.clip not in speech_ids:
        raise ValueError(f"clip {args.clip!r} not in speech manifest")
    index = args.index if args.index is not None else speech_ids.index(args.clip)
    seed_plan = derive_clip_seed(config.seed, index, args.clip, "plan")
    seed_mask = derive_clip_seed(config.seed, index, args.clip, "mask")
    plan = sample_plan(seed_plan, manifests, config, exclude_speech_id=args.clip)
    print(f"clip: {args.clip}  index: {index}")
    print(f"seed_plan: {seed_plan}  seed_mask: {seed_mask}")
    for stage in plan.stages:
        if stage.kind == "multi_speaker":
            p = stage.params
            rir_wav = wavio.read_wav(manifests["rir"][p.rir_id].path)
            r0 = Rir(taps=rir_wav.samples, sample_rate_hz=rir_wav.sample_rate_hz)
            target_rir, interferer_rir, branch = plan_mixture_rirs(r0, p)
            print(
                f"stage multi_speaker: interferer={p.interferer_id} rir={p.rir_id} "
                f"branch={branch} sir_db={p.sir_db:.3f} "
                f"drr_r0={compute_drr(r0).drr_db:.3f} "
                f"drr_target={compute_drr(target_rir).drr_db:.3f} "
                f"drr_interferer={compute_drr(interferer_rir).drr_db:.3f} "
                f"decay_t0={p.decay.t0_samples} decay_t1={p.decay.t1_samples} "
                f"alpha={p.decay.alpha:.3f}"
            )
        else:
            fields = ", ".join(
                f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                for k, v in vars(stage.params).items()
            )
            print(f"stage {stage.kind}: {fields}")
    frames = frame_count(config.clip_samples, config.stft)
    dummy = MagnitudeSpectrogram(values=np.zeros((frames, config.stft.bins)))
    _, mask = choose_and_apply(
        dummy,
        config.spectro_probs,
        np.random.default_rng(seed_mask),
        time_fraction=config.time_mask_fraction,
        freq_max_fraction=config.freq_mask_max_fraction,
        tf_fraction=config.tf_mask_fraction,
    )
    print(
        f"spectro mask: kind={mask.kind} masked_fraction={mask.masked_fraction:.6f} "
        f"grid={mask.frames}x{mask.bins}"
    )
    return 0


def _cmd_train_toy(args) -> int:
    config = load_config(args.config)
    batch_dir = Path(args.batch_dir if args.batch_dir else config.output_dir)
    records = load_index(batch_dir / "index.jsonl")
    wanted = [r for r in records if r["index"] == args.clip_index]
    if not wanted:
        raise ValueError(f"no clip with index {args.clip_index} in the batch index")
    rec = wanted[0]
    if rec["status"] != "ok":
        raise ValueError(f"clip {args.clip_index} failed during generation")
    masked_values = read_tensor(batch_dir / rec["artifacts"]["masked_tensor"]["path"])
    mask = read_mask_rle(batch_dir / rec["artifacts"]["mask_rle"]["path"])
    target_wav = wavio.read_wav(batch_dir / rec["artifacts"]["target_wav"]["path"])
    target_mag = magnitude(stft(target_wav, config.stft))
    if config.compression == "log1p":
        target_mag = log1p_compress(target_mag)
    input_mag = MagnitudeSpectrogram(
        values=masked_values.astype(np.float64), compression=config.compression
    )
    if args.max_frames:
        n = args.max_frames
        input_mag = MagnitudeSpectrogram(input_mag.values[:n], input_mag.compression)
        target_mag = MagnitudeSpectrogram(target_mag.values[:n], target_mag.compression)
        mask = SpectroMask(kind=mask.kind, grid=mask.grid[:n])
    batch = build_masked_batch(input_mag, target_mag, mask, args.patch_h, args.patch_w)
    model = init_model(
        batch.input_patches.patch_dim,
        args.embed_dim,
        np.random.default_rng(args.init_seed),
    )
    losses = train(model, batch, steps=args.steps, lr=args.lr, adapt_lr=not args.no_adapt_lr)
    final = forward(model, batch)[1]
    with open(args.loss_csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "loss"])
        for i, loss in enumerate(losses):
            writer.writerow([i, f"{loss:.10g}"])
        writer.writerow([args.steps, f"{final:.10g}"])
    save_checkpoint(model, args.checkpoint)
    print(
        f"trained {args.steps} steps on {batch.input_patches.n_patches} patches "
        f"({int(np.sum(~batch.patch_mask))} masked): "
        f"loss {losses[0]:.6g} -> {final:.6g}"
    )
    print(f"loss curve -> {args.loss_csv}")
    print(f"checkpoint -> {args.checkpoint}")
    return 0


def _cmd_enhance(args) -> int:
    config = load_config(args.config)
    noisy = wavio.read_wav(args.noisy)
    noisy_spec = stft(noisy, config.stft)
    if args.mask:
        mask = TfMask(values=read_tensor(args.mask).astype(np.float64))
    else:
        if not args.clean:
            raise ValueError("either --mask or --clean is required")
        clean = wavio.read_wav(args.clean)
        if len(clean) != len(noisy):
            raise ValueError("clean and noisy lengths differ")
        mask = oracle_irm(
            magnitude(stft(clean, config.stft)), magnitude(noisy_spec), eps=args.eps
        )
    enhanced_spec = apply_tf_mask(noisy_spec, mask)
    enhanced = istft(enhanced_spec, length=len(noisy))
    wavio.write_wav(args.out, enhanced)
    print(f"enhanced -> {args.out}")
    if args.clean:
        clean = wavio.read_wav(args.clean)
        print(f"ssnr_noisy_db: {ssnr(clean, noisy):.3f}")
        print(f"ssnr_enhanced_db: {ssnr(clean, enhanced):.3f}")
    return 0


def _cmd_score(args) -> int:
    rows = []
    for ref_path, est_path in args.pair:
        ref = wavio.read_wav(ref_path)
        est = wavio.read_wav(est_path)
        rows.append((Path(est_path).stem, ssnr(ref, est)))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["clip_id", "ssnr_db"])
        for clip_id, value in rows:
            writer.writerow([clip_id, f"{value:.6f}"])
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_validate_manifest(args) -> int:
    try:
        manifest = load_manifest(
            args.path,
            pipeline_rate_hz=args.rate,
            decode_sample=args.decode_sample,
            expect_kind=args.kind,
        )
    except ManifestError as exc:
        for problem in exc.problems:
            print(f"PROBLEM: {problem}", file=sys.stderr)
        return 1
    print(f"OK: {len(manifest)} entries")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reverbforge",
        description="Deterministic speech-distortion augmentation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate an augmented batch")
    _add_common(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", default=None, help="output directory (default: config)")
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker threads (default: $REVERBFORGE_WORKERS or 1)",
    )
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("inspect", help="print one clip's plan and mask stats")
    _add_common(p)
    p.add_argument("--clip", required=True, help="speech corpus id")
    p.add_argument("--index", type=int, default=None, help="clip index (default: manifest position)")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("train-toy", help="train the toy masked autoencoder on a generated clip")
    p.add_argument("--config", required=True)
    p.add_argument("--batch-dir", default=None)
    p.add_argument("--clip-index", type=int, default=0)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--no-adapt-lr", action="store_true", help="fixed learning rate")
    p.add_argument("--embed-dim", type=int, default=32)
    p.add_argument("--patch-h", type=int, default=4, help="bins per patch")
    p.add_argument("--patch-w", type=int, default=4, help="frames per patch")
    p.add_argument("--max-frames", type=int, default=0, help="crop grids to the first N frames")
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--checkpoint", default="mae_toy.bin")
    p.add_argument("--loss-csv", default="loss.csv")
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_train_toy)

    p = sub.add_parser("enhance", help="apply a TF mask (or oracle IRM) to a noisy WAV")
    p.add_argument("--config", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--clean", default=None, help="clean reference (for oracle IRM and SSNR)")
    p.add_argument("--mask", default=None, help="TF mask tensor file")
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--out", required=True)
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("score", help="segmental SNR of estimate vs reference, CSV out")
    p.add_argument(
        "--pair",
        nargs=2,
        action="append",
        metavar=("REF", "EST"),
        required=True,
        help="reference and estimate WAVs, repeatable",
    )
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("validate-manifest", help="validate a corpus manifest")
    p.add_argument("--path", required=True)
    p.add_argument("--kind", default=None, choices=("speech", "noise", "rir"))
    p.add_argument("--rate", type=int, default=None)
    p.add_argument("--decode-sample", type=int, default=8)
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_validate_manifest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
