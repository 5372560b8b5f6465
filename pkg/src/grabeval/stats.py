"""Internal-noise figures and the ADC histogram test.

Noise figures are computed from the grey-level histogram with exact
integer arithmetic: with S the sample sum and n the pixel count, every
deviation e - M equals (n*e - S)/n, so all sums are integers until the
final division. This keeps results independent of summation order and
exact for frames up to 2**16 x 2**16 at 16 bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from grabeval.frame import Frame

DEFAULT_MASS_FRACTION = 0.95
DEFAULT_MISSING_REL_THRESHOLD = 0.1


class DegenerateHistogramError(ValueError):
    """Histogram cannot support a missing-code analysis (too few codes populated)."""


@dataclass(frozen=True)
class NoiseReport:
    mean_level: float
    abs_mean_noise: float
    max_noise: float
    rms_noise: float
    peak_code: int | None = None
    peak_width: int | None = None

    def to_dict(self) -> dict:
        return {
            "mean_level": self.mean_level,
            "abs_mean_noise": self.abs_mean_noise,
            "max_noise": self.max_noise,
            "rms_noise": self.rms_noise,
            "peak_code": self.peak_code,
            "peak_width": self.peak_width,
        }


@dataclass(frozen=True, eq=False)
class Histogram:
    bit_depth: int
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.counts, other.counts)

    def to_csv(self) -> str:
        return histogram_csv(self.counts)


def histogram_csv(counts) -> str:
    return "code,count\n" + "".join(f"{c},{int(n)}\n" for c, n in enumerate(counts))


@dataclass(frozen=True)
class PeakWidth:
    peak_code: int
    width: int


@dataclass(frozen=True)
class AdcReport:
    missing_codes: list
    effective_resolution_bits: float
    histogram: Histogram

    def to_dict(self) -> dict:
        return {
            "missing_codes": list(self.missing_codes),
            "effective_resolution_bits": self.effective_resolution_bits,
            "bit_depth": self.histogram.bit_depth,
            "histogram": [int(n) for n in self.histogram.counts],
        }


def build_histogram(frame: Frame) -> Histogram:
    counts = np.bincount(frame.samples.ravel(), minlength=frame.max_code + 1).astype(np.int64)
    return Histogram(frame.bit_depth, counts)


def _populated(hist: Histogram):
    codes = np.flatnonzero(hist.counts)
    return [int(c) for c in codes], [int(n) for n in hist.counts[codes]]


def _exact_mean(frame: Frame) -> Fraction:
    codes, counts = _populated(build_histogram(frame))
    total = sum(c * n for c, n in zip(codes, counts))
    return Fraction(total, frame.width * frame.height)


def mean_level(frame: Frame) -> float:
    """Mean grey level of the frame, in LSB."""
    return float(_exact_mean(frame))


def noise_metrics(frame: Frame, mass_fraction: float = DEFAULT_MASS_FRACTION) -> NoiseReport:
    """Mean level and the absolute-mean, maximum and RMS noise about it.

    RMS is the square root of the sample mean-square deviation (population
    normalisation, divide by pixel count).
    """
    hist = build_histogram(frame)
    codes, counts = _populated(hist)
    n = frame.width * frame.height
    s = sum(c * k for c, k in zip(codes, counts))
    sq = sum(c * c * k for c, k in zip(codes, counts))

    abs_sum = sum(abs(n * c - s) * k for c, k in zip(codes, counts))  # = n * sum|e - M|
    max_dev = max(abs(n * c - s) for c in codes)  # = n * max|e - M|
    sq_dev = n * sq - s * s  # = n^2 * sum (e - M)^2 / n

    peak = histogram_peak_width(hist, mass_fraction)
    return NoiseReport(
        mean_level=float(Fraction(s, n)),
        abs_mean_noise=float(Fraction(abs_sum, n * n)),
        max_noise=float(Fraction(max_dev, n)),
        rms_noise=math.sqrt(Fraction(sq_dev, n * n)),
        peak_code=peak.peak_code,
        peak_width=peak.width,
    )


def histogram_peak_width(hist: Histogram, mass_fraction: float = DEFAULT_MASS_FRACTION) -> PeakWidth:
    """Width of the histogram peak around the dominant grey level.

    ``width`` is 2w+1 for the smallest w such that codes
    [peak-w, peak+w] hold at least ``mass_fraction`` of all samples.
    """
    if not 0 < mass_fraction < 1:
        raise ValueError(f"mass_fraction must be in (0, 1), got {mass_fraction}")
    counts = hist.counts
    total = int(counts.sum())
    if total == 0:
        raise DegenerateHistogramError("histogram is empty")
    peak = int(np.argmax(counts))
    cum = np.concatenate(([0], np.cumsum(counts)))
    need = mass_fraction * total
    last = len(counts) - 1
    for w in range(len(counts)):
        lo, hi = max(peak - w, 0), min(peak + w, last)
        if cum[hi + 1] - cum[lo] >= need:
            return PeakWidth(peak, 2 * w + 1)
    raise AssertionError("unreachable: the full code range holds all mass")


def _check_not_degenerate(hist: Histogram):
    populated = int(np.count_nonzero(hist.counts))
    if populated < 3:
        raise DegenerateHistogramError(
            f"only {populated} grey codes populated; a ramp-type capture is needed"
        )


def find_missing_codes(hist: Histogram, rel_threshold: float = DEFAULT_MISSING_REL_THRESHOLD) -> list:
    """Codes that are absent or far rarer than their neighbours.

    Code c is flagged when counts[c] is zero or below ``rel_threshold``
    times the mean of its neighbours' counts (one neighbour at the ends).
    """
    if not 0 <= rel_threshold < 1:
        raise ValueError(f"rel_threshold must be in [0, 1), got {rel_threshold}")
    _check_not_degenerate(hist)
    counts = hist.counts.astype(np.float64)
    ref = np.empty_like(counts)
    ref[1:-1] = (counts[:-2] + counts[2:]) / 2
    ref[0] = counts[1]
    ref[-1] = counts[-2]
    flagged = (counts == 0) | (counts < rel_threshold * ref)
    return [int(c) for c in np.flatnonzero(flagged)]


def effective_resolution(hist: Histogram, rel_threshold: float = DEFAULT_MISSING_REL_THRESHOLD) -> float:
    """log2 of the number of codes reaching ``rel_threshold`` of the ideal uniform count."""
    _check_not_degenerate(hist)
    ideal = hist.total / len(hist.counts)
    live = int(np.count_nonzero(hist.counts >= rel_threshold * ideal))
    return math.log2(live)


def adc_analysis(frame: Frame, rel_threshold: float = DEFAULT_MISSING_REL_THRESHOLD) -> AdcReport:
    hist = build_histogram(frame)
    return AdcReport(
        missing_codes=find_missing_codes(hist, rel_threshold),
        effective_resolution_bits=effective_resolution(hist, rel_threshold),
        histogram=hist,
    )
