"""Synthetic test waveforms and calibrated defect injection.

The three pattern kinds stand in for the video generator's test signals:

* ``uniform`` - flat grey field, used for noise, black level and spectrum tests.
* ``ramp``    - left-to-right linear ramp, used for the ADC histogram test.
* ``bars``    - repeating vertical bars, used for sync and edge timing tests.

Randomness comes from numpy's PCG64 generator. Each random defect stage
draws from its own stream seeded with ``(seed, stage_index)``, so
enabling one defect never perturbs the values drawn by another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from grabeval.frame import Frame

PATTERN_KINDS = ("uniform", "ramp", "bars")
NOISE_DISTRIBUTIONS = ("gaussian", "uniform")

_STREAM_NOISE = 0
_STREAM_JITTER = 1
_STREAM_OFFSET = 2


class InvalidSpecError(ValueError):
    pass


class InvalidModelError(ValueError):
    pass


def round_half_up(x):
    """Quantise to the nearest code, halves rounding up (no banker's rounding)."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


@dataclass(frozen=True)
class PatternSpec:
    kind: str = "uniform"
    width: int = 256
    height: int = 256
    bit_depth: int = 8
    level: float = 128
    start_level: float = 0
    end_level: Optional[float] = None  # None -> full scale
    low_level: float = 20
    high_level: float = 220
    period: int = 32
    duty: float = 0.5

    def validate(self):
        if self.kind not in PATTERN_KINDS:
            raise InvalidSpecError(f"unknown pattern kind {self.kind!r}")
        if not 1 <= self.bit_depth <= 16:
            raise InvalidSpecError(f"bit_depth must be in 1..16, got {self.bit_depth}")
        if self.width < 2 or self.height < 2:
            raise InvalidSpecError(f"frame must be at least 2x2, got {self.width}x{self.height}")
        maxcode = (1 << self.bit_depth) - 1
        if self.kind == "uniform":
            levels = [self.level]
        elif self.kind == "ramp":
            levels = [self.start_level, self.ramp_end]
        else:
            levels = [self.low_level, self.high_level]
            if self.period < 2:
                raise InvalidSpecError(f"bar period must be >= 2, got {self.period}")
            if not 0 < self.duty < 1:
                raise InvalidSpecError(f"duty must be in (0, 1), got {self.duty}")
        for lv in levels:
            if not 0 <= lv <= maxcode:
                raise InvalidSpecError(f"level {lv} outside [0, {maxcode}]")

    @property
    def ramp_end(self) -> float:
        return (1 << self.bit_depth) - 1 if self.end_level is None else self.end_level


@dataclass(frozen=True)
class DefectModel:
    """Defects to inject, applied in field order. ``None`` disables a stage.

    noise_distribution / noise_sigma
        Additive noise. For ``gaussian`` the parameter is the standard
        deviation; for ``uniform`` it is the half-width of the interval.
    jitter_amplitude
        Integer J; each line is shifted right by d ~ U{-J..J} pixels.
    line_offset_sigma
        Gaussian per-line black-level offset, constant along the line.
    decay_slope
        Level change in LSB over one full line (linear, zero at column 0).
    interference
        ``(bin_fraction, amplitude, phase)``; adds amplitude*cos(2*pi*f*j + phase).
    missing_codes
        Codes removed after quantisation.
    """

    noise_distribution: str = "gaussian"
    noise_sigma: Optional[float] = None
    jitter_amplitude: Optional[int] = None
    line_offset_sigma: Optional[float] = None
    decay_slope: Optional[float] = None
    interference: Optional[tuple] = None
    missing_codes: frozenset = field(default_factory=frozenset)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "missing_codes", frozenset(int(c) for c in self.missing_codes))
        if self.interference is not None:
            values = tuple(float(v) for v in self.interference)
            if len(values) == 2:
                values += (0.0,)
            object.__setattr__(self, "interference", values)

    def validate(self):
        if self.noise_distribution not in NOISE_DISTRIBUTIONS:
            raise InvalidModelError(f"unknown noise distribution {self.noise_distribution!r}")
        if self.noise_sigma is not None and not self.noise_sigma >= 0:
            raise InvalidModelError("noise sigma/half-width must be >= 0")
        if self.jitter_amplitude is not None:
            if int(self.jitter_amplitude) != self.jitter_amplitude or self.jitter_amplitude < 0:
                raise InvalidModelError("jitter amplitude must be a non-negative integer")
        if self.line_offset_sigma is not None and not self.line_offset_sigma >= 0:
            raise InvalidModelError("line offset sigma must be >= 0")
        if self.decay_slope is not None and not math.isfinite(self.decay_slope):
            raise InvalidModelError("decay slope must be finite")
        if self.interference is not None:
            if len(self.interference) != 3:
                raise InvalidModelError("interference needs (bin_fraction, amplitude[, phase])")
            f = self.interference[0]
            if not 0 < f <= 0.5:
                raise InvalidModelError(f"interference bin_fraction must be in (0, 0.5], got {f}")
        if self.seed < 0:
            raise InvalidModelError("seed must be unsigned")

    @property
    def is_empty(self) -> bool:
        return (
            not self.noise_sigma
            and not self.jitter_amplitude
            and not self.line_offset_sigma
            and not self.decay_slope
            and (self.interference is None or self.interference[1] == 0)
            and not self.missing_codes
        )


def generate_pattern(spec: PatternSpec) -> Frame:
    spec.validate()
    j = np.arange(spec.width)
    if spec.kind == "uniform":
        row = np.full(spec.width, spec.level, dtype=np.float64)
    elif spec.kind == "ramp":
        row = spec.start_level + (spec.ramp_end - spec.start_level) * j / (spec.width - 1)
    else:
        n_high = int(round_half_up(spec.duty * spec.period))
        row = np.where(j % spec.period < n_high, spec.high_level, spec.low_level)
    row = round_half_up(row)
    return Frame(np.tile(row, (spec.height, 1)), spec.bit_depth)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def _shift_lines(data: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Shift line k right by shifts[k]; vacated pixels repeat the line's edge value."""
    width = data.shape[1]
    cols = np.arange(width)[None, :] - shifts[:, None]
    np.clip(cols, 0, width - 1, out=cols)
    return np.take_along_axis(data, cols, axis=1)


def _missing_code_map(codes: frozenset, maxcode: int) -> np.ndarray:
    """Lookup table sending every listed code to the nearest unlisted one below
    (or above, when nothing below is free)."""
    lut = np.arange(maxcode + 1)
    for c in sorted(codes):
        if not 0 <= c <= maxcode:
            raise InvalidModelError(f"missing code {c} outside [0, {maxcode}]")
        target = c - 1
        while target >= 0 and target in codes:
            target -= 1
        if target < 0:
            target = c + 1
            while target <= maxcode and target in codes:
                target += 1
            if target > maxcode:
                raise InvalidModelError("missing_codes removes every code")
        lut[c] = target
    return lut


def apply_defects(frame: Frame, model: DefectModel) -> Frame:
    """Inject the defects of ``model`` into ``frame``.

    Stages run in a fixed order: noise, jitter, line offset, decay,
    interference, then quantisation/clamping, then missing codes. Output
    is bit-identical for the same (frame, model).
    """
    model.validate()
    if model.is_empty:
        return frame

    height, width = frame.shape
    maxcode = frame.max_code
    data = frame.samples.astype(np.float64)

    if model.noise_sigma:
        rng = _rng(model.seed, _STREAM_NOISE)
        if model.noise_distribution == "gaussian":
            data = data + rng.normal(0.0, model.noise_sigma, size=data.shape)
        else:
            data = data + rng.uniform(-model.noise_sigma, model.noise_sigma, size=data.shape)

    if model.jitter_amplitude:
        amp = int(model.jitter_amplitude)
        shifts = _rng(model.seed, _STREAM_JITTER).integers(-amp, amp + 1, size=height)
        data = _shift_lines(data, shifts)

    if model.line_offset_sigma:
        offsets = _rng(model.seed, _STREAM_OFFSET).normal(0.0, model.line_offset_sigma, size=height)
        data = data + offsets[:, None]

    j = np.arange(width)
    if model.decay_slope:
        data = data + model.decay_slope * j / (width - 1)

    if model.interference is not None and model.interference[1]:
        f, amplitude, phase = model.interference
        data = data + amplitude * np.cos(2 * np.pi * f * j + phase)

    codes = np.clip(round_half_up(data), 0, maxcode).astype(np.int64)

    if model.missing_codes:
        codes = _missing_code_map(model.missing_codes, maxcode)[codes]

    return Frame(codes, frame.bit_depth)
