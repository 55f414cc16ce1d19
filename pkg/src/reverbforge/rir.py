"""Room-impulse-response analysis and surgery.

Direct-to-reverberant ratio (DRR), direct/early attenuation and late-tail
decay are the levers used to synthesize distance-separated speaker pairs:
pushing a source "farther from the microphone" lowers its RIR's DRR, pulling
it closer raises it.

All functions are pure over immutable RIRs. The direct path is located by the
absolute-peak tap; distance ordering via DRR assumes diffuse reverberant
tails (a solitary dominant late reflection can defeat it).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .dsp import Waveform

# Direct-path extent around the peak tap used to split P_D from P_R.
DIRECT_WINDOW_MS = 2.5
# Early/late reflection split after the direct path.
EARLY_MS = 50.0
DEFAULT_ATTENUATION_DB = 15.0


@dataclass
class Rir:
    """Impulse response with its direct-path peak located."""

    taps: np.ndarray
    sample_rate_hz: int
    direct_index: int = field(init=False)

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.size == 0:
            raise ValueError("RIR taps must be a non-empty 1-D array")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not np.any(self.taps):
            raise ValueError("all-zero RIR")
        self.direct_index = int(np.argmax(np.abs(self.taps)))

    def __len__(self) -> int:
        return int(self.taps.size)


@dataclass(frozen=True)
class DrrReport:
    direct_power: float
    reverberant_power: float
    drr_db: float  # +inf when the tail carries no energy


@dataclass(frozen=True)
class DecayParams:
    """Cosine decay ramp over tap indices [t0, t1], floor gain alpha."""

    t0_samples: int
    t1_samples: int
    alpha: float

    def __post_init__(self) -> None:
        if self.t0_samples < 0:
            raise ValueError("t0_samples must be non-negative")
        if self.t1_samples == self.t0_samples:
            raise ValueError("degenerate decay ramp")
        if self.t1_samples < self.t0_samples:
            raise ValueError("t1_samples must exceed t0_samples")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def direct_window_samples(sample_rate_hz: int) -> int:
    """Half-width of the direct-path window (2.5 ms each side of the peak)."""
    return max(1, round(DIRECT_WINDOW_MS * 1e-3 * sample_rate_hz))


def compute_drr(r: Rir, direct_window: int | None = None) -> DrrReport:
    """Direct-to-reverberant ratio: 10*log10(P_D / P_R).

    P_D sums squared taps over [direct_index - w, direct_index + w] (clipped
    to bounds); P_R is everything else. A tail with exactly zero energy maps
    to a +inf sentinel.
    """
    w = direct_window_samples(r.sample_rate_hz) if direct_window is None else direct_window
    if w < 1:
        raise ValueError("direct window must span at least one sample")
    energy = r.taps**2
    lo = max(0, r.direct_index - w)
    hi = min(len(r), r.direct_index + w + 1)
    direct_power = float(np.sum(energy[lo:hi]))
    reverberant_power = float(np.sum(energy)) - direct_power
    # Clamp tiny negative residue from the subtraction above.
    reverberant_power = max(reverberant_power, 0.0)
    if reverberant_power == 0.0:
        drr_db = np.inf
    else:
        drr_db = 10.0 * np.log10(direct_power / reverberant_power)
    return DrrReport(direct_power, reverberant_power, float(drr_db))


def attenuate_direct_and_early(
    r: Rir,
    early_ms: float = EARLY_MS,
    attenuation_db: float = DEFAULT_ATTENUATION_DB,
) -> Rir:
    """Scale the direct path and early reflections down by attenuation_db.

    The scaled span runs from the direct-path onset (2.5 ms before the peak)
    through early_ms after it, clamped to the tap range. Lowers DRR whenever
    the late tail carries energy.
    """
    if attenuation_db < 0:
        raise ValueError("attenuation_db must be non-negative")
    gain = 10.0 ** (-attenuation_db / 20.0)
    onset = max(0, r.direct_index - direct_window_samples(r.sample_rate_hz))
    end = min(len(r), r.direct_index + round(early_ms * 1e-3 * r.sample_rate_hz) + 1)
    taps = r.taps.copy()
    taps[onset:end] *= gain
    return Rir(taps=taps, sample_rate_hz=r.sample_rate_hz)


def decay_late(r: Rir, p: DecayParams) -> Rir:
    """Decay the late reverberant tail with a raised-cosine ramp.

    Gain profile: 1 before t0, then (1+a)/2 + ((1-a)/2)cos(pi(t-t0)/(t1-t0))
    down to the floor a at t1, a beyond. Raises DRR (the direct window is
    untouched while tail energy shrinks) provided t0 sits past the direct
    window.
    """
    if p.t0_samples <= r.direct_index:
        raise ValueError("decay ramp must start after the direct path")
    gain = decay_gain_profile(len(r), p)
    return Rir(taps=r.taps * gain, sample_rate_hz=r.sample_rate_hz)


def decay_gain_profile(n_taps: int, p: DecayParams) -> np.ndarray:
    """The decay gain A(t) alone, for inspection and boundary checks."""
    if p.t1_samples > n_taps:
        raise ValueError("t1_samples exceeds tap count")
    gain = np.ones(n_taps)
    t0, t1, a = p.t0_samples, p.t1_samples, p.alpha
    ramp_t = np.arange(t0, min(t1, n_taps - 1) + 1)
    gain[t0 : t1 + 1] = (1 + a) / 2 + (1 - a) / 2 * np.cos(
        np.pi * (ramp_t - t0) / (t1 - t0)
    )
    gain[t1 + 1 :] = a
    return gain


def default_decay_params(
    r: Rir, alpha: float, early_ms: float = EARLY_MS
) -> DecayParams:
    """T0 at the late-tail onset, T1 halfway through the remaining tail."""
    t0 = r.direct_index + round(early_ms * 1e-3 * r.sample_rate_hz)
    if t0 >= len(r) - 1:
        raise ValueError("RIR too short for a late-tail decay ramp")
    t1 = t0 + max(1, (len(r) - t0) // 2)
    return DecayParams(t0_samples=t0, t1_samples=min(t1, len(r)), alpha=alpha)


def apply_rir(s: Waveform, r: Rir) -> Waveform:
    """Convolve speech with the RIR, aligned so the direct tap is zero delay.

    Full linear convolution truncated to the input length after shifting by
    direct_index; augmented and target clips stay sample-aligned this way.
    """
    if s.sample_rate_hz != r.sample_rate_hz:
        raise ValueError(
            f"sample-rate mismatch: waveform {s.sample_rate_hz} Hz, "
            f"RIR {r.sample_rate_hz} Hz"
        )
    full = fftconvolve(s.samples, r.taps, mode="full")
    out = full[r.direct_index : r.direct_index + len(s)]
    return Waveform(samples=out, sample_rate_hz=s.sample_rate_hz)
