"""Per-line power spectra and dominant-frequency detection.

Each line's periodogram is the squared magnitude of its unnormalised,
unwindowed DFT over bins 0..W//2. Spectra are summed over all lines into a
global spectrum, and bins standing more than ``k_dom`` times above the
mean non-DC power are reported as dominant interference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from grabeval.frame import Frame

DEFAULT_K_DOM = 5.0


class LineTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class DominantBin:
    bin: int
    freq_fraction: float
    power_ratio_percent: float
    width: int = field(default=0, repr=False)

    @property
    def label(self) -> str:
        return fs_label(self.bin, self.width)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    global_power: np.ndarray
    mean_power: float
    dominant: list
    k_dom: float
    width: int
    orientation: str = "rows"

    def to_dict(self) -> dict:
        return {
            "orientation": self.orientation,
            "line_length": self.width,
            "k_dom": self.k_dom,
            "mean_power": self.mean_power,
            "dominant": [
                {
                    "bin": d.bin,
                    "freq_fraction": d.freq_fraction,
                    "label": d.label,
                    "power_ratio_percent": d.power_ratio_percent,
                }
                for d in self.dominant
            ],
            "dominant_text": format_dominant(self.dominant),
            "global_power": [float(p) for p in self.global_power],
        }

    def to_csv(self) -> str:
        return spectrum_csv(self.global_power, self.width)


def line_power_spectrum(line) -> np.ndarray:
    x = np.asarray(line, dtype=np.float64)
    if x.ndim != 1 or x.size < 4:
        raise LineTooShortError(f"line must hold at least 4 samples, got {x.size}")
    return np.abs(np.fft.rfft(x)) ** 2


def global_spectrum(frame: Frame) -> np.ndarray:
    """Sum of the per-line power spectra (lines accumulated in order)."""
    if frame.width < 4:
        raise LineTooShortError(f"lines must hold at least 4 samples, got {frame.width}")
    spectra = np.abs(np.fft.rfft(frame.samples.astype(np.float64), axis=1)) ** 2
    return spectra.sum(axis=0)


def spectrum_mean(global_power) -> float:
    """Mean power over bins 1..W//2; the DC bin is excluded."""
    fg = np.asarray(global_power, dtype=np.float64)
    return float(fg[1:].mean())


def dominant_frequencies(global_power, k_dom: float = DEFAULT_K_DOM, width: int | None = None) -> list:
    """Bins whose power exceeds ``k_dom`` times the mean non-DC power.

    ``width`` is the analysed line length; it defaults to 2*(len-1), which
    is exact for even lengths.
    """
    if not k_dom > 1:
        raise ValueError(f"k_dom must be > 1, got {k_dom}")
    fg = np.asarray(global_power, dtype=np.float64)
    if width is None:
        width = 2 * (len(fg) - 1)
    threshold = k_dom * spectrum_mean(fg)
    bins = [i for i in range(1, len(fg)) if fg[i] > threshold]
    if not bins:
        return []
    strongest = max(fg[i] for i in bins)
    return [
        DominantBin(i, i / width, float(100.0 * fg[i] / strongest), width)
        for i in bins
    ]


def fs_label(bin_index: int, width: int) -> str:
    """Frequency of a bin as a fraction of the sampling rate, e.g. ``3fs/8``."""
    frac = Fraction(bin_index, width)
    num = "" if frac.numerator == 1 else str(frac.numerator)
    if frac.denominator == 1:
        return f"{num}fs"
    return f"{num}fs/{frac.denominator}"


def _percent(p: float) -> str:
    text = f"{p:.1f}"
    return text[:-2] if text.endswith(".0") else text


def format_dominant(dominant) -> str:
    """Render as ``fs/8-75.5% fs/4-80% fs/2-100%``; ``-`` when empty."""
    if not dominant:
        return "-"
    return " ".join(f"{d.label}-{_percent(d.power_ratio_percent)}%" for d in dominant)


def spectrum_csv(global_power, width: int) -> str:
    lines = ["bin,freq_fraction,power"]
    lines.extend(f"{i},{i / width!r},{float(p)!r}" for i, p in enumerate(global_power))
    return "\n".join(lines) + "\n"


def spectral_analysis(frame: Frame, k_dom: float = DEFAULT_K_DOM, orientation: str = "rows") -> SpectrumReport:
    """Dominant-frequency analysis along lines (``rows``) or ``columns``."""
    if orientation not in ("rows", "columns"):
        raise ValueError(f"orientation must be 'rows' or 'columns', got {orientation!r}")
    if orientation == "columns":
        frame = frame.transposed()
    fg = global_spectrum(frame)
    return SpectrumReport(
        global_power=fg,
        mean_power=spectrum_mean(fg),
        dominant=dominant_frequencies(fg, k_dom, frame.width),
        k_dom=float(k_dom),
        width=frame.width,
        orientation=orientation,
    )
