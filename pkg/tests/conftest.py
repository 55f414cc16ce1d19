"""Session fixtures: a tiny on-disk corpus with manifests."""

import json

import numpy as np
import pytest

from helpers import RATE, high_drr_rir, low_drr_rir, speech_like
from reverbforge.config import PipelineConfig
from reverbforge.dsp import Waveform
from reverbforge.manifest import load_manifest
from reverbforge.wavio import write_wav


def _write_manifest(path, records):
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """Six speech clips, three noises, six RIRs (both DRR regimes)."""
    root = tmp_path_factory.mktemp("corpus")
    rng = np.random.default_rng(20240801)

    speech_recs = []
    for i, seconds in enumerate((2.5, 3.0, 4.0, 4.5, 5.0, 3.5)):
        n = int(seconds * RATE)
        w = speech_like(rng, n)
        name = f"spk{i}.wav"
        write_wav(root / name, w)
        speech_recs.append(
            {"id": f"spk{i}", "path": name, "kind": "speech", "duration_s": seconds}
        )
    _write_manifest(root / "speech.jsonl", speech_recs)

    noise_recs = []
    for i, seconds in enumerate((3.0, 5.0, 6.0)):
        n = int(seconds * RATE)
        x = rng.normal(0, 0.05, n)
        if i == 1:
            x = np.cumsum(x) * 0.02  # brownish
            x -= x.mean()
        if i == 2:
            x *= 0.5 * (1 + np.sin(2 * np.pi * 2.0 * np.arange(n) / RATE))
        x = np.clip(x, -0.9, 0.9)
        name = f"noise{i}.wav"
        write_wav(root / name, Waveform(samples=x, sample_rate_hz=RATE))
        noise_recs.append(
            {"id": f"noise{i}", "path": name, "kind": "noise", "duration_s": seconds}
        )
    _write_manifest(root / "noise.jsonl", noise_recs)

    rir_recs = []
    for i in range(6):
        r = high_drr_rir(rng) if i < 3 else low_drr_rir(rng)
        peak = np.max(np.abs(r.taps))
        taps = r.taps / peak * 0.98  # keep 16-bit serialization clean
        name = f"rir{i}.wav"
        write_wav(root / name, Waveform(samples=taps, sample_rate_hz=RATE))
        rir_recs.append(
            {
                "id": f"rir{i}",
                "path": name,
                "kind": "rir",
                "duration_s": len(taps) / RATE,
            }
        )
    _write_manifest(root / "rir.jsonl", rir_recs)

    manifests = {
        kind: load_manifest(root / f"{kind}.jsonl", pipeline_rate_hz=RATE)
        for kind in ("speech", "noise", "rir")
    }
    return {"root": root, "manifests": manifests}


@pytest.fixture()
def base_config():
    return PipelineConfig(seed=7)
