"""Tests for time / frequency / random-TF spectrogram masks."""

import numpy as np
import pytest
from scipy import stats

from reverbforge.dsp import MagnitudeSpectrogram
from reverbforge.specmask import (
    SpectroMask,
    apply_mask,
    choose_and_apply,
    freq_mask,
    random_tf_mask,
    time_mask,
)


def mag(frames, bins, rng=None):
    rng = rng or np.random.default_rng(0)
    return MagnitudeSpectrogram(values=rng.uniform(0, 10, size=(frames, bins)))


class TestTimeMask:
    def test_exact_count_twenty_percent(self):
        rng = np.random.default_rng(1)
        m = time_mask(100, 40, 0.2, rng)
        zero_cols = np.where(~m.grid.any(axis=1))[0]
        assert len(zero_cols) == 20
        # Masked frames are fully zero across all bins
        assert np.all(m.grid[zero_cols] == 0)

    def test_fraction_zero_identity(self):
        m = time_mask(50, 30, 0.0, np.random.default_rng(2))
        assert np.all(m.grid == 1)
        assert m.masked_fraction == 0.0

    def test_fraction_one_all_zero(self):
        m = time_mask(50, 30, 1.0, np.random.default_rng(3))
        assert np.all(m.grid == 0)
        assert m.masked_fraction == 1.0

    def test_floor_semantics(self):
        m = time_mask(7, 5, 0.5, np.random.default_rng(4))
        assert np.count_nonzero(~m.grid.any(axis=1)) == 3  # floor(3.5)

    def test_fraction_out_of_range(self):
        with pytest.raises(ValueError):
            time_mask(10, 10, 1.2, np.random.default_rng(0))


class TestFreqMask:
    def test_band_contiguous_and_top_anchored(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m = freq_mask(20, 256, 0.5, rng)
            zero_bins = np.where(~m.grid.any(axis=0))[0]
            k = len(zero_bins)
            assert 1 <= k <= 128
            assert np.array_equal(zero_bins, np.arange(256 - k, 256))
            # All frames share the band
            assert np.all(m.grid[:, 256 - k :] == 0)
            assert np.all(m.grid[:, : 256 - k] == 1)

    def test_dc_never_masked(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            m = freq_mask(10, 64, 0.5, rng)
            assert np.all(m.grid[:, 0] == 1)

    def test_zero_max_fraction_is_identity(self):
        m = freq_mask(10, 64, 0.0, np.random.default_rng(7))
        assert np.all(m.grid == 1)

    def test_tiny_max_fraction_floor_to_zero(self):
        # floor(0.01 * 64) = 0 -> identity permitted
        m = freq_mask(10, 64, 0.01, np.random.default_rng(8))
        assert np.all(m.grid == 1)


class TestRandomTfMask:
    def test_exact_count(self):
        m = random_tf_mask(10, 10, 0.75, np.random.default_rng(9))
        assert np.count_nonzero(m.grid == 0) == 75
        assert m.masked_fraction == 0.75

    def test_fraction_zero_identity(self):
        m = random_tf_mask(10, 10, 0.0, np.random.default_rng(10))
        assert np.all(m.grid == 1)

    def test_uniformity_chi_square(self):
        # Aggregate zero counts per cell over many draws; sampling without
        # replacement only shrinks per-cell variance, so the multinomial
        # chi-square test is conservative here.
        rng = np.random.default_rng(11)
        frames, bins, fraction, draws = 6, 5, 0.5, 10000
        counts = np.zeros(frames * bins)
        per_draw = int(np.floor(fraction * frames * bins))
        for _ in range(draws):
            m = random_tf_mask(frames, bins, fraction, rng)
            counts += (m.grid == 0).ravel()
        expected = draws * per_draw / (frames * bins)
        chi2 = np.sum((counts - expected) ** 2 / expected)
        critical = stats.chi2.ppf(0.999, frames * bins - 1)
        assert chi2 < critical


class TestApplyAndChoose:
    def test_masked_cells_exactly_zero(self):
        rng = np.random.default_rng(12)
        m = mag(20, 30, rng)
        masked, mask = choose_and_apply(m, (0.0, 0.0, 1.0), rng)
        assert np.all(masked.values[mask.grid == 0] == 0)
        assert np.array_equal(masked.values[mask.grid == 1], m.values[mask.grid == 1])

    def test_mask_idempotent(self):
        rng = np.random.default_rng(13)
        m = mag(20, 30, rng)
        mask = random_tf_mask(20, 30, 0.5, rng)
        once = apply_mask(m, mask)
        twice = apply_mask(once, mask)
        assert np.array_equal(once.values, twice.values)

    def test_probs_one_zero_zero_always_time(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            _, mask = choose_and_apply(mag(10, 10), (1.0, 0.0, 0.0), rng)
            assert mask.kind == "time"

    def test_species_frequencies(self):
        rng = np.random.default_rng(15)
        probs = (0.1, 0.1, 0.8)
        counts = {"time": 0, "frequency": 0, "random_tf": 0}
        draws = 10000
        for _ in range(draws):
            _, mask = choose_and_apply(mag(6, 6), probs, rng)
            counts[mask.kind] += 1
        assert counts["time"] / draws == pytest.approx(0.1, abs=0.02)
        assert counts["frequency"] / draws == pytest.approx(0.1, abs=0.02)
        assert counts["random_tf"] / draws == pytest.approx(0.8, abs=0.02)

    def test_probs_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            choose_and_apply(mag(5, 5), (0.5, 0.5, 0.5), np.random.default_rng(0))

    def test_deterministic_under_seed(self):
        m = mag(30, 20)
        a = choose_and_apply(m, (0.1, 0.1, 0.8), np.random.default_rng(99))
        b = choose_and_apply(m, (0.1, 0.1, 0.8), np.random.default_rng(99))
        assert a[1].kind == b[1].kind
        assert np.array_equal(a[1].grid, b[1].grid)
        assert np.array_equal(a[0].values, b[0].values)

    def test_compression_preserved(self):
        rng = np.random.default_rng(16)
        m = MagnitudeSpectrogram(values=rng.uniform(0, 3, (8, 8)), compression="log1p")
        masked, _ = choose_and_apply(m, (0.0, 0.0, 1.0), rng)
        assert masked.compression == "log1p"


class TestSpectroMaskType:
    def test_masked_fraction_exact(self):
        grid = np.ones((4, 5), dtype=np.uint8)
        grid[0, :] = 0
        mask = SpectroMask(kind="time", grid=grid)
        assert mask.masked_fraction == 5 / 20

    def test_non_binary_grid_rejected(self):
        with pytest.raises(ValueError, match="binary"):
            SpectroMask(kind="time", grid=np.full((2, 2), 3))

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            SpectroMask(kind="diagonal", grid=np.ones((2, 2)))
