"""Tests for WAV I/O, manifests, config files, and tensor/RLE serialization."""

import json

import numpy as np
import pytest

from reverbforge.config import PipelineConfig, load_config
from reverbforge.dsp import Waveform
from reverbforge.manifest import ManifestError, load_manifest, save_manifest
from reverbforge.specmask import SpectroMask, random_tf_mask
from reverbforge.tensorio import (
    mask_to_rle,
    read_mask_rle,
    read_tensor,
    rle_to_mask,
    write_mask_rle,
    write_tensor,
)
from reverbforge.wavio import read_wav, wav_frame_count, write_wav

RATE = 16000


class TestWavIo:
    def test_round_trip_within_quantization(self, tmp_path):
        rng = np.random.default_rng(0)
        w = Waveform(rng.uniform(-0.99, 0.99, 5000), RATE)
        path = tmp_path / "x.wav"
        clipped = write_wav(path, w)
        assert clipped == 0
        back = read_wav(path)
        assert back.sample_rate_hz == RATE
        assert np.max(np.abs(back.samples - w.samples)) <= 0.5 / 32768 + 1e-12

    def test_clip_count_recorded(self, tmp_path):
        w = Waveform(np.array([0.5, 1.5, -2.0, 0.1]), RATE)
        assert write_wav(tmp_path / "x.wav", w) == 2

    def test_frame_count_header_only(self, tmp_path):
        w = Waveform(np.zeros(1234), RATE)
        write_wav(tmp_path / "x.wav", w)
        assert wav_frame_count(tmp_path / "x.wav") == 1234

    def test_write_read_deterministic(self, tmp_path):
        rng = np.random.default_rng(1)
        w = Waveform(rng.uniform(-1, 1, 3000), RATE)
        write_wav(tmp_path / "a.wav", w)
        write_wav(tmp_path / "b.wav", w)
        assert (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()


class TestManifest:
    def make_entries(self, tmp_path, n=3, kind="speech"):
        recs = []
        for i in range(n):
            name = f"{kind}{i}.wav"
            write_wav(tmp_path / name, Waveform(np.ones(100) * 0.1, RATE))
            recs.append(
                {"id": f"{kind}{i}", "path": name, "kind": kind, "duration_s": 100 / RATE}
            )
        return recs

    def write_jsonl(self, path, recs):
        path.write_text("".join(json.dumps(r) + "\n" for r in recs))

    def test_empty_file_warns_and_loads_empty(self, tmp_path, caplog):
        path = tmp_path / "m.jsonl"
        path.write_text("")
        manifest = load_manifest(path)
        assert len(manifest) == 0
        assert any("empty" in r.message for r in caplog.records)

    def test_duplicate_id_named_in_error(self, tmp_path):
        recs = self.make_entries(tmp_path, 2)
        recs[1]["id"] = recs[0]["id"]
        path = tmp_path / "m.jsonl"
        self.write_jsonl(path, recs)
        with pytest.raises(ManifestError, match="speech0"):
            load_manifest(path)

    def test_save_load_round_trip(self, tmp_path):
        recs = self.make_entries(tmp_path, 3)
        path = tmp_path / "m.jsonl"
        self.write_jsonl(path, recs)
        manifest = load_manifest(path, pipeline_rate_hz=RATE)
        out = tmp_path / "copy.jsonl"
        save_manifest(manifest, out)
        again = load_manifest(out, pipeline_rate_hz=RATE)
        assert [e.id for e in again.entries] == [e.id for e in manifest.entries]
        assert [e.path for e in again.entries] == [e.path for e in manifest.entries]

    def test_missing_file_reported(self, tmp_path):
        recs = self.make_entries(tmp_path, 1)
        recs.append({"id": "ghost", "path": "ghost.wav", "kind": "speech", "duration_s": 1.0})
        path = tmp_path / "m.jsonl"
        self.write_jsonl(path, recs)
        with pytest.raises(ManifestError, match="ghost.wav"):
            load_manifest(path)

    def test_unknown_field_rejected(self, tmp_path):
        recs = self.make_entries(tmp_path, 1)
        recs[0]["extra"] = 1
        path = tmp_path / "m.jsonl"
        self.write_jsonl(path, recs)
        with pytest.raises(ManifestError, match="extra"):
            load_manifest(path)

    def test_wrong_rate_reported_for_speech_not_rir(self, tmp_path):
        for kind in ("speech", "rir"):
            name = f"{kind}.wav"
            write_wav(tmp_path / name, Waveform(np.ones(100) * 0.1, 8000))
            path = tmp_path / f"{kind}.jsonl"
            self.write_jsonl(
                path, [{"id": kind, "path": name, "kind": kind, "duration_s": 0.0125}]
            )
        with pytest.raises(ManifestError, match="sample rate"):
            load_manifest(tmp_path / "speech.jsonl", pipeline_rate_hz=RATE)
        manifest = load_manifest(tmp_path / "rir.jsonl", pipeline_rate_hz=RATE)
        assert len(manifest) == 1

    def test_expect_kind_enforced(self, tmp_path):
        recs = self.make_entries(tmp_path, 1, kind="noise")
        path = tmp_path / "m.jsonl"
        self.write_jsonl(path, recs)
        with pytest.raises(ManifestError, match="expected"):
            load_manifest(path, expect_kind="speech")

    def test_problems_itemized(self, tmp_path):
        recs = self.make_entries(tmp_path, 2)
        recs[0]["kind"] = "mystery"
        recs[1]["path"] = "nope.wav"
        path = tmp_path / "m.jsonl"
        self.write_jsonl(path, recs)
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert len(err.value.problems) == 2


class TestConfig:
    def test_defaults_valid(self):
        cfg = PipelineConfig()
        assert cfg.clip_samples == 64000
        assert cfg.stft.window_len_samples == 512

    def test_load_partial_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 5, "compression": "log1p"}))
        cfg = load_config(path)
        assert cfg.seed == 5
        assert cfg.compression == "log1p"
        assert cfg.clip_seconds == 4.0

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seeds": 5}))
        with pytest.raises(ValueError, match="seeds"):
            load_config(path)

    def test_unknown_nested_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"stft": {"window_len_samples": 512, "fft_len": 1024}}))
        with pytest.raises(ValueError, match="fft_len"):
            load_config(path)

    def test_spectro_probs_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            PipelineConfig(spectro_probs=(0.5, 0.2, 0.2))

    def test_inverted_range_rejected(self):
        with pytest.raises(ValueError, match="inverted"):
            PipelineConfig(snr_db=(0.0, -30.0))

    def test_bad_probability_rejected(self):
        from reverbforge.config import StageProbs

        with pytest.raises(ValueError, match="probability"):
            StageProbs(codec=1.5)


class TestTensorIo:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        values = rng.normal(size=(33, 17)).astype(np.float32)
        path = tmp_path / "t.f32"
        write_tensor(path, values)
        back = read_tensor(path)
        assert back.dtype == np.float32
        assert np.array_equal(back, values)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "t.f32"
        path.write_bytes(b"XXXX" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            read_tensor(path)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "t.f32"
        write_tensor(path, np.ones((4, 4), dtype=np.float32))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ValueError, match="size"):
            read_tensor(path)


class TestMaskRle:
    def test_round_trip_random(self, tmp_path):
        rng = np.random.default_rng(3)
        for _ in range(10):
            mask = random_tf_mask(13, 7, float(rng.uniform(0, 1)), rng)
            back = rle_to_mask(mask_to_rle(mask))
            assert back.kind == mask.kind
            assert np.array_equal(back.grid, mask.grid)
            assert back.masked_fraction == mask.masked_fraction

    def test_file_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        mask = random_tf_mask(20, 10, 0.75, rng)
        path = tmp_path / "mask.json"
        write_mask_rle(path, mask)
        back = read_mask_rle(path)
        assert np.array_equal(back.grid, mask.grid)

    def test_all_ones_single_run(self):
        mask = SpectroMask(kind="time", grid=np.ones((3, 4), dtype=np.uint8))
        rle = mask_to_rle(mask)
        assert rle["first"] == 1
        assert rle["runs"] == [12]

    def test_bad_coverage_rejected(self):
        with pytest.raises(ValueError, match="cover"):
            rle_to_mask({"kind": "time", "frames": 2, "bins": 2, "first": 1, "runs": [3]})
