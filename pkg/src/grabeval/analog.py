"""Analogue front-end checks: black-level stability and decay, edge timing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grabeval.frame import Frame

DEFAULT_BLOCK_SIZE = 16


class FrameTooSmallError(ValueError):
    pass


class NotBimodalError(ValueError):
    """Frame has no distinct low and high plateaus (not a bars-type capture)."""


@dataclass(frozen=True, eq=False)
class BlockMeanMap:
    block_size: int
    means: np.ndarray  # shape (height // block_size, width // block_size)

    @property
    def corner_delta(self) -> float:
        return float(abs(self.means[0, 0] - self.means[-1, -1]))

    def to_csv(self) -> str:
        return block_means_csv(self.means)


def block_means_csv(means) -> str:
    """One CSV row per block row, no header."""
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in means)


@dataclass(frozen=True)
class LevelStability:
    line_means: list
    line_stability_lsb: float
    variation_percent: float


@dataclass(frozen=True)
class EdgeTiming:
    rise_times: list
    fall_times: list
    low_plateau: int
    high_plateau: int

    def to_dict(self) -> dict:
        return {
            "low_plateau": self.low_plateau,
            "high_plateau": self.high_plateau,
            "rise_times": list(self.rise_times),
            "fall_times": list(self.fall_times),
            "mean_rise_px": float(np.mean(self.rise_times)) if self.rise_times else None,
            "mean_fall_px": float(np.mean(self.fall_times)) if self.fall_times else None,
            "max_rise_px": max(self.rise_times) if self.rise_times else None,
            "max_fall_px": max(self.fall_times) if self.fall_times else None,
        }


@dataclass(frozen=True)
class AnalogReport:
    stability: LevelStability
    decay_slope_lsb_per_line: float
    block_map: BlockMeanMap
    edges: EdgeTiming | None = None

    @property
    def corner_delta_lsb(self) -> float:
        return self.block_map.corner_delta

    def to_dict(self) -> dict:
        return {
            "line_stability_lsb": self.stability.line_stability_lsb,
            "variation_percent": self.stability.variation_percent,
            "decay_slope_lsb_per_line": self.decay_slope_lsb_per_line,
            "corner_delta_lsb": self.corner_delta_lsb,
            "block_size": self.block_map.block_size,
            "block_means": [[float(v) for v in row] for row in self.block_map.means],
            "line_means": list(self.stability.line_means),
            "edge_timing": self.edges.to_dict() if self.edges is not None else None,
        }


def block_means(frame: Frame, block_size: int = DEFAULT_BLOCK_SIZE) -> BlockMeanMap:
    """Mean of each full ``block_size`` square; trailing partial blocks are dropped."""
    if block_size < 1:
        raise ValueError("block_size must be positive")
    rows, cols = frame.height // block_size, frame.width // block_size
    if rows == 0 or cols == 0:
        raise FrameTooSmallError(
            f"{frame.width}x{frame.height} frame is smaller than one {block_size}x{block_size} block"
        )
    data = frame.samples[: rows * block_size, : cols * block_size].astype(np.int64)
    sums = data.reshape(rows, block_size, cols, block_size).sum(axis=(1, 3))
    return BlockMeanMap(block_size, sums / float(block_size * block_size))


def line_means(frame: Frame) -> np.ndarray:
    return frame.samples.astype(np.int64).sum(axis=1) / frame.width


def level_stability(frame: Frame) -> LevelStability:
    means = line_means(frame)
    return LevelStability(
        line_means=[float(m) for m in means],
        line_stability_lsb=float(np.max(np.abs(np.diff(means)))),
        variation_percent=float((means.max() - means.min()) / frame.max_code * 100),
    )


def level_decay(frame: Frame) -> float:
    """Least-squares slope of the column means, in LSB per full line."""
    cols = frame.samples.astype(np.int64).sum(axis=0) / frame.height
    j = np.arange(frame.width, dtype=np.float64)
    jc = j - j.mean()
    slope = float(np.dot(jc, cols - cols.mean()) / np.dot(jc, jc))
    return slope * (frame.width - 1)


def plateaus(frame: Frame) -> tuple[int, int]:
    """Low and high plateau codes: histogram modes below and above the frame mean.

    Ties go to the lower code. Raises NotBimodalError when the two modes are
    not clearly separated, which is how flat or noisy flat fields are rejected.
    """
    counts = np.bincount(frame.samples.ravel(), minlength=frame.max_code + 1)
    mean = frame.samples.astype(np.int64).sum() / frame.samples.size
    codes = np.arange(len(counts))
    below = np.where(codes < mean, counts, 0)
    above = np.where(codes > mean, counts, 0)
    if not below.any() or not above.any():
        raise NotBimodalError("frame has no samples on one side of its mean")
    low, high = int(np.argmax(below)), int(np.argmax(above))

    # a noisy flat field also has a mode on each side of its mean; require a
    # gap of 2+ LSB and each half's RMS spread about its plateau to stay under
    # a quarter of the gap
    if high - low < 2:
        raise NotBimodalError(f"plateaus {low} and {high} are adjacent codes")
    split = (low + high) / 2
    for side, plateau in ((codes < split, low), (codes >= split, high)):
        n = counts[side].sum()
        spread = np.sqrt((counts[side] * (codes[side] - plateau) ** 2).sum() / n)
        if spread >= (high - low) / 4:
            raise NotBimodalError(
                f"plateaus {low} and {high} are not separated (spread {spread:.2f} LSB)"
            )
    return low, high


def _line_transitions(line: np.ndarray, lo: float, hi: float):
    """Yield (is_rise, n_between) for each complete low<->high passage in a line."""
    state = np.where(line <= lo, -1, np.where(line >= hi, 1, 0))
    last_side = 0
    between = 0
    for s in state:
        if s == 0:
            between += 1
            continue
        if last_side and s != last_side:
            yield s > 0, between
        last_side = s
        between = 0


def edge_timing(frame: Frame, low_frac: float = 0.1, high_frac: float = 0.9) -> EdgeTiming:
    """Rise and fall times in pixels: samples strictly between the two thresholds.

    Thresholds sit at ``low_frac`` and ``high_frac`` of the plateau-to-plateau
    amplitude. Passages that start or end at the line border are not counted.
    """
    if not 0 < low_frac < high_frac < 1:
        raise ValueError("need 0 < low_frac < high_frac < 1")
    low, high = plateaus(frame)
    amp = high - low
    lo_thr, hi_thr = low + low_frac * amp, low + high_frac * amp
    rises, falls = [], []
    for line in frame.samples:
        for is_rise, n in _line_transitions(line, lo_thr, hi_thr):
            (rises if is_rise else falls).append(n)
    return EdgeTiming(rises, falls, low, high)


def analog_analysis(frame: Frame, block_size: int = DEFAULT_BLOCK_SIZE, with_edges: bool = True) -> AnalogReport:
    """Black-level figures, plus edge timing when the frame has two plateaus."""
    edges = None
    if with_edges:
        try:
            edges = edge_timing(frame)
        except NotBimodalError:
            edges = None
    return AnalogReport(
        stability=level_stability(frame),
        decay_slope_lsb_per_line=level_decay(frame),
        block_map=block_means(frame, block_size),
        edges=edges,
    )
