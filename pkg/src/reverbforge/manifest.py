"""Corpus manifests: line-delimited JSON records of audio files.

One record per line: {"id": ..., "path": ..., "kind": ..., "duration_s": ...}.
Paths are resolved relative to the manifest file's directory, which keeps a
corpus directory relocatable as a unit.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from . import wavio

log = logging.getLogger(__name__)

VALID_KINDS = ("speech", "noise", "rir")
_FIELDS = {"id", "path", "kind", "duration_s"}


class ManifestError(ValueError):
    """Itemized manifest validation failure."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__(
            "manifest validation failed:\n" + "\n".join(f"  - {p}" for p in problems)
        )


@dataclass
class ManifestEntry:
    id: str
    path: Path
    kind: str
    duration_s: float


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, entry_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise KeyError(entry_id)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]


def load_manifest(
    path: str | Path,
    pipeline_rate_hz: int | None = None,
    decode_sample: int = 8,
    expect_kind: str | None = None,
) -> CorpusManifest:
    """Parse and validate a manifest file.

    The first `decode_sample` files of each kind are decode-checked (mono,
    16-bit, and for non-RIR kinds the pipeline rate; RIRs may carry any rate
    at load and are rejected at use if mismatched). All problems are
    collected and raised together as a ManifestError.
    """
    path = Path(path)
    problems: list[str] = []
    entries: list[ManifestEntry] = []
    seen_ids: set[str] = set()

    text = path.read_text()
    if not text.strip():
        log.warning("manifest %s is empty", path)
        return CorpusManifest(entries=[])

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"line {lineno}: not valid JSON ({exc.msg})")
            continue
        if not isinstance(rec, dict):
            problems.append(f"line {lineno}: record must be a JSON object")
            continue
        missing = _FIELDS - rec.keys()
        unknown = rec.keys() - _FIELDS
        if missing:
            problems.append(f"line {lineno}: missing fields {sorted(missing)}")
            continue
        if unknown:
            problems.append(f"line {lineno}: unknown fields {sorted(unknown)}")
            continue
        entry_id = str(rec["id"])
        if entry_id in seen_ids:
            problems.append(f"line {lineno}: duplicate id {entry_id!r}")
            continue
        seen_ids.add(entry_id)
        kind = rec["kind"]
        if kind not in VALID_KINDS:
            problems.append(f"line {lineno}: unknown kind {kind!r}")
            continue
        if expect_kind is not None and kind != expect_kind:
            problems.append(
                f"line {lineno}: kind {kind!r} where {expect_kind!r} expected"
            )
            continue
        file_path = Path(rec["path"])
        if not file_path.is_absolute():
            file_path = path.parent / file_path
        if not file_path.exists():
            problems.append(f"line {lineno}: missing file {file_path}")
            continue
        entries.append(
            ManifestEntry(
                id=entry_id,
                path=file_path,
                kind=kind,
                duration_s=float(rec["duration_s"]),
            )
        )

    checked: dict[str, int] = {}
    for e in entries:
        if checked.get(e.kind, 0) >= decode_sample:
            continue
        checked[e.kind] = checked.get(e.kind, 0) + 1
        try:
            w = wavio.read_wav(e.path)
        except (ValueError, EOFError, wavio.wave.Error) as exc:
            problems.append(f"{e.id}: failed to decode ({exc})")
            continue
        if (
            pipeline_rate_hz is not None
            and e.kind != "rir"
            and w.sample_rate_hz != pipeline_rate_hz
        ):
            problems.append(
                f"{e.id}: sample rate {w.sample_rate_hz} != pipeline rate "
                f"{pipeline_rate_hz}"
            )

    if problems:
        raise ManifestError(problems)
    return CorpusManifest(entries=entries)


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    """Write one JSON record per line; paths are stored relative when possible."""
    path = Path(path)
    lines = []
    for e in manifest.entries:
        p = e.path
        try:
            p = p.relative_to(path.parent)
        except ValueError:
            pass
        lines.append(
            json.dumps(
                {
                    "id": e.id,
                    "path": str(p),
                    "kind": e.kind,
                    "duration_s": e.duration_s,
                },
                sort_keys=True,
            )
        )
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
