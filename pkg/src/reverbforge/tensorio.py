"""Binary tensor files and run-length-encoded mask sidecars.

Tensor layout, fixed for cross-language readers: 4 magic bytes "RFTN",
then two little-endian uint32 (frames, bins), then frames*bins row-major
little-endian float32 values.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .specmask import SpectroMask

TENSOR_MAGIC = b"RFTN"


def tensor_bytes(values: np.ndarray) -> bytes:
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("tensor files hold 2-D grids")
    frames, bins = values.shape
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    return TENSOR_MAGIC + struct.pack("<II", frames, bins) + payload


def write_tensor(path: str | Path, values: np.ndarray) -> None:
    Path(path).write_bytes(tensor_bytes(values))


def read_tensor(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != TENSOR_MAGIC:
        raise ValueError(f"{path}: not a tensor file (bad magic)")
    frames, bins = struct.unpack("<II", raw[4:12])
    expected = 12 + 4 * frames * bins
    if len(raw) != expected:
        raise ValueError(f"{path}: size {len(raw)} != expected {expected}")
    values = np.frombuffer(raw, dtype="<f4", offset=12).copy()
    return values.reshape(frames, bins)


def mask_to_rle(mask: SpectroMask) -> dict:
    """Row-major run-length encoding of the binary grid."""
    flat = mask.grid.ravel()
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    boundaries = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(boundaries)
    return {
        "kind": mask.kind,
        "frames": mask.frames,
        "bins": mask.bins,
        "first": int(flat[0]),
        "runs": [int(r) for r in runs],
    }


def rle_to_mask(d: dict) -> SpectroMask:
    total = d["frames"] * d["bins"]
    if sum(d["runs"]) != total:
        raise ValueError("RLE runs do not cover the grid")
    flat = np.empty(total, dtype=np.uint8)
    value = int(d["first"])
    pos = 0
    for run in d["runs"]:
        flat[pos : pos + run] = value
        pos += run
        value ^= 1
    return SpectroMask(kind=d["kind"], grid=flat.reshape(d["frames"], d["bins"]))


def write_mask_rle(path: str | Path, mask: SpectroMask) -> None:
    Path(path).write_text(json.dumps(mask_to_rle(mask), sort_keys=True) + "\n")


def read_mask_rle(path: str | Path) -> SpectroMask:
    return rle_to_mask(json.loads(Path(path).read_text()))
