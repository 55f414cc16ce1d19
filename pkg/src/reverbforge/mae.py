"""Desk-scale masked patch-autoencoder with hand-derived gradients.

The smallest model that exercises the pretraining mechanics end to end: an
affine encoder maps visible patches to an embedding, masked positions are
represented by a single learned mask token, an affine decoder reconstructs
every patch, and the MSE against the pre-distortion target covers all
patches, so the model is trained to undo distortions on visible patches and
to fill in masked ones. Gradients are analytic and checked against finite
differences in the test suite.
"""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import MagnitudeSpectrogram
from .specmask import SpectroMask

log = logging.getLogger(__name__)

_CKPT_MAGIC = b"MAET"
_CKPT_VERSION = 1


@dataclass
class PatchGrid:
    """Non-overlapping tiling of a frames x bins grid into flat patches.

    patch_w frames by patch_h bins per patch; patches are ordered row-major
    over (frame block, bin block) and flattened row-major (frame-major)
    inside. origins[i] = (frame offset, bin offset) of patch i.
    """

    patches: np.ndarray
    patch_h: int
    patch_w: int
    block_rows: int
    block_cols: int
    origins: np.ndarray

    @property
    def n_patches(self) -> int:
        return self.patches.shape[0]

    @property
    def patch_dim(self) -> int:
        return self.patches.shape[1]

    @property
    def covered_frames(self) -> int:
        return self.block_rows * self.patch_w

    @property
    def covered_bins(self) -> int:
        return self.block_cols * self.patch_h


def patchify(
    m: MagnitudeSpectrogram | np.ndarray, patch_h: int, patch_w: int
) -> PatchGrid:
    """Tile a grid into patch_h x patch_w patches, edge-cropping remainders.

    Trailing frames and top bins that do not fill a whole patch are cropped
    (and the crop logged); within the cropped extent the tiling is lossless
    and unpatchify inverts it exactly.
    """
    values = m.values if isinstance(m, MagnitudeSpectrogram) else np.asarray(m)
    if patch_h <= 0 or patch_w <= 0:
        raise ValueError("patch dimensions must be positive")
    frames, bins = values.shape
    block_rows = frames // patch_w
    block_cols = bins // patch_h
    if block_rows == 0 or block_cols == 0:
        raise ValueError("grid smaller than a single patch")
    cropped_f, cropped_b = block_rows * patch_w, block_cols * patch_h
    if (cropped_f, cropped_b) != (frames, bins):
        log.info(
            "patchify cropped grid %dx%d to %dx%d for %dx%d patches",
            frames, bins, cropped_f, cropped_b, patch_w, patch_h,
        )
    cropped = values[:cropped_f, :cropped_b]
    # (block_rows, patch_w, block_cols, patch_h) -> patch-major layout
    tiles = cropped.reshape(block_rows, patch_w, block_cols, patch_h)
    patches = tiles.transpose(0, 2, 1, 3).reshape(
        block_rows * block_cols, patch_w * patch_h
    )
    fb, cb = np.meshgrid(np.arange(block_rows), np.arange(block_cols), indexing="ij")
    origins = np.stack([fb.ravel() * patch_w, cb.ravel() * patch_h], axis=1)
    return PatchGrid(
        patches=np.ascontiguousarray(patches, dtype=np.float64),
        patch_h=patch_h,
        patch_w=patch_w,
        block_rows=block_rows,
        block_cols=block_cols,
        origins=origins,
    )


def unpatchify(g: PatchGrid) -> np.ndarray:
    """Invert patchify over the cropped extent."""
    tiles = g.patches.reshape(g.block_rows, g.block_cols, g.patch_w, g.patch_h)
    return tiles.transpose(0, 2, 1, 3).reshape(g.covered_frames, g.covered_bins)


@dataclass
class MaskedBatch:
    """Paired input/target patches plus per-patch visibility.

    A patch counts as masked only when every TF cell inside it is masked;
    partially covered patches stay visible (with zeros inside).
    """

    input_patches: PatchGrid
    target_patches: PatchGrid
    patch_mask: np.ndarray  # bool per patch, True = visible

    def __post_init__(self) -> None:
        self.patch_mask = np.asarray(self.patch_mask, dtype=bool)
        if self.input_patches.patches.shape != self.target_patches.patches.shape:
            raise ValueError("input and target patch grids differ in shape")
        if self.patch_mask.shape != (self.input_patches.n_patches,):
            raise ValueError("patch_mask length does not match patch count")


def build_masked_batch(
    input_mag: MagnitudeSpectrogram,
    target_mag: MagnitudeSpectrogram,
    mask: SpectroMask,
    patch_h: int,
    patch_w: int,
) -> MaskedBatch:
    if input_mag.values.shape != target_mag.values.shape:
        raise ValueError("input and target spectrogram shapes differ")
    if mask.grid.shape != input_mag.values.shape:
        raise ValueError("mask shape does not match spectrograms")
    inp = patchify(input_mag, patch_h, patch_w)
    tgt = patchify(target_mag, patch_h, patch_w)
    mask_patches = patchify(mask.grid.astype(np.float64), patch_h, patch_w)
    visible = mask_patches.patches.any(axis=1)
    return MaskedBatch(input_patches=inp, target_patches=tgt, patch_mask=visible)


@dataclass
class MaeModel:
    """Affine encoder/decoder pair plus a learned mask token."""

    encode_w: np.ndarray  # (d, patch_dim)
    encode_b: np.ndarray  # (d,)
    decode_w: np.ndarray  # (patch_dim, d)
    decode_b: np.ndarray  # (patch_dim,)
    mask_token: np.ndarray  # (d,)

    @property
    def embed_dim(self) -> int:
        return self.encode_w.shape[0]

    @property
    def patch_dim(self) -> int:
        return self.encode_w.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        return {
            "encode_w": self.encode_w,
            "encode_b": self.encode_b,
            "decode_w": self.decode_w,
            "decode_b": self.decode_b,
            "mask_token": self.mask_token,
        }


def init_model(patch_dim: int, embed_dim: int, rng: np.random.Generator) -> MaeModel:
    scale = 1.0 / np.sqrt(patch_dim)
    return MaeModel(
        encode_w=rng.normal(0.0, scale, size=(embed_dim, patch_dim)),
        encode_b=np.zeros(embed_dim),
        decode_w=rng.normal(0.0, 1.0 / np.sqrt(embed_dim), size=(patch_dim, embed_dim)),
        decode_b=np.zeros(patch_dim),
        mask_token=rng.normal(0.0, 0.02, size=embed_dim),
    )


def _embed(model: MaeModel, batch: MaskedBatch) -> np.ndarray:
    """Per-patch embeddings: encoder output for visible, mask token otherwise.

    Masked patch content is never read, which is what makes the loss exactly
    invariant to whatever sits inside a masked patch.
    """
    p = batch.input_patches.patches
    if p.shape[1] != model.patch_dim:
        raise ValueError(
            f"patch dim {p.shape[1]} does not match model ({model.patch_dim})"
        )
    h = np.tile(model.mask_token, (p.shape[0], 1))
    vis = batch.patch_mask
    h[vis] = p[vis] @ model.encode_w.T + model.encode_b
    return h


def forward(model: MaeModel, batch: MaskedBatch) -> tuple[PatchGrid, float]:
    """Reconstruct all patches; MSE against the target over every patch."""
    h = _embed(model, batch)
    recon = h @ model.decode_w.T + model.decode_b
    diff = recon - batch.target_patches.patches
    loss = float(np.mean(diff**2))
    grid = batch.target_patches
    recon_grid = PatchGrid(
        patches=recon,
        patch_h=grid.patch_h,
        patch_w=grid.patch_w,
        block_rows=grid.block_rows,
        block_cols=grid.block_cols,
        origins=grid.origins,
    )
    return recon_grid, loss


def loss_and_grads(
    model: MaeModel, batch: MaskedBatch
) -> tuple[float, dict[str, np.ndarray]]:
    """Analytic gradients of the all-patch MSE for every parameter block."""
    p = batch.input_patches.patches
    t = batch.target_patches.patches
    vis = batch.patch_mask
    h = _embed(model, batch)
    recon = h @ model.decode_w.T + model.decode_b
    diff = recon - t
    n, d_out = diff.shape
    loss = float(np.mean(diff**2))
    g_recon = (2.0 / (n * d_out)) * diff
    g_decode_w = g_recon.T @ h
    g_decode_b = g_recon.sum(axis=0)
    g_h = g_recon @ model.decode_w
    g_encode_w = g_h[vis].T @ p[vis]
    g_encode_b = g_h[vis].sum(axis=0)
    g_mask_token = g_h[~vis].sum(axis=0)
    return loss, {
        "encode_w": g_encode_w,
        "encode_b": g_encode_b,
        "decode_w": g_decode_w,
        "decode_b": g_decode_b,
        "mask_token": g_mask_token,
    }


def backward_and_step(model: MaeModel, batch: MaskedBatch, lr: float) -> float:
    """One full-batch gradient-descent step in place; returns the pre-step loss."""
    if lr < 0:
        raise ValueError("lr must be non-negative")
    loss, grads = loss_and_grads(model, batch)
    if not np.isfinite(loss):
        raise ValueError("non-finite loss; model left unchanged")
    for name, p in model.params().items():
        p -= lr * grads[name]
    return loss


def train(
    model: MaeModel,
    batch: MaskedBatch,
    steps: int,
    lr: float,
    adapt_lr: bool = False,
) -> np.ndarray:
    """Full-batch gradient descent; returns the loss before each step.

    With adapt_lr, a step that raises the loss is reverted and retried at
    half the rate, and accepted steps grow the rate slightly (bold-driver
    schedule), making the default rate workable across data scales.
    Deterministic either way.
    """
    losses = np.empty(steps)
    if not adapt_lr:
        for i in range(steps):
            losses[i] = backward_and_step(model, batch, lr)
        return losses
    current = loss_and_grads(model, batch)[0]
    for i in range(steps):
        losses[i] = current
        snapshot = {k: v.copy() for k, v in model.params().items()}
        for _ in range(60):
            backward_and_step(model, batch, lr)
            new_loss = loss_and_grads(model, batch)[0]
            if np.isfinite(new_loss) and new_loss <= current:
                lr *= 1.05
                current = new_loss
                break
            for k, v in model.params().items():
                v[...] = snapshot[k]
            lr *= 0.5
        else:
            break  # no admissible step left at any rate
    return losses


def save_checkpoint(model: MaeModel, path: str | Path) -> None:
    """Flat binary: magic, version, dims, then little-endian float64 blocks.

    Layout: b"MAET" | u16 version | u16 pad | u32 embed_dim | u32 patch_dim |
    encode_w (d*D) | encode_b (d) | decode_w (D*d) | decode_b (D) |
    mask_token (d), all row-major float64 little-endian.
    """
    header = _CKPT_MAGIC + struct.pack(
        "<HHII", _CKPT_VERSION, 0, model.embed_dim, model.patch_dim
    )
    blocks = b"".join(
        np.ascontiguousarray(p, dtype="<f8").tobytes()
        for p in model.params().values()
    )
    Path(path).write_bytes(header + blocks)


def load_checkpoint(path: str | Path) -> MaeModel:
    raw = Path(path).read_bytes()
    if raw[:4] != _CKPT_MAGIC:
        raise ValueError("not a model checkpoint (bad magic)")
    version, _, d, patch_dim = struct.unpack("<HHII", raw[4:16])
    if version != _CKPT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    sizes = [d * patch_dim, d, patch_dim * d, patch_dim, d]
    expected = 16 + 8 * sum(sizes)
    if len(raw) != expected:
        raise ValueError(f"checkpoint size {len(raw)} != expected {expected}")
    offset = 16
    blocks = []
    for size in sizes:
        blocks.append(np.frombuffer(raw, dtype="<f8", count=size, offset=offset).copy())
        offset += 8 * size
    return MaeModel(
        encode_w=blocks[0].reshape(d, patch_dim),
        encode_b=blocks[1],
        decode_w=blocks[2].reshape(patch_dim, d),
        decode_b=blocks[3],
        mask_token=blocks[4],
    )
