"""Synchronisation accuracy from the scatter of per-line transition points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grabeval.analog import plateaus
from grabeval.frame import Frame

UNIT = "points/transition"


class InconsistentTransitionsError(ValueError):
    def __init__(self, expected: int, bad_lines: list, counts: list):
        self.expected = expected
        self.bad_lines = bad_lines
        shown = ", ".join(f"line {k}: {n}" for k, n in zip(bad_lines[:10], counts[:10]))
        more = f" (+{len(bad_lines) - 10} more)" if len(bad_lines) > 10 else ""
        super().__init__(
            f"line 0 has {expected} transitions but {len(bad_lines)} lines differ: {shown}{more}"
        )


class NoTransitionsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TransitionSet:
    """``points[k, q]`` is the column of transition q on line k."""

    points: np.ndarray
    polarity: tuple  # "rising" / "falling" per transition, from line 0
    width: int

    @property
    def q_count(self) -> int:
        return self.points.shape[1]

    @property
    def n_lines(self) -> int:
        return self.points.shape[0]

    def to_csv(self) -> str:
        return transitions_csv(self.points)


@dataclass(frozen=True)
class SyncReport:
    means: list
    accuracy: float
    per_transition_deviation: list
    q_count: int
    n_lines: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "unit": UNIT,
            "q_count": self.q_count,
            "n_lines": self.n_lines,
            "means": list(self.means),
            "per_transition_deviation": list(self.per_transition_deviation),
        }


def _num(v: float):
    return int(v) if float(v).is_integer() else repr(float(v))


def transitions_csv(points) -> str:
    """Rows ``line,q,column`` with q counted from 1."""
    lines = ["line,q,column"]
    for k, row in enumerate(points):
        lines.extend(f"{k},{q + 1},{_num(v)}" for q, v in enumerate(row))
    return "\n".join(lines) + "\n"


def _line_crossings(line: np.ndarray, mid: float, subpixel: bool):
    high = line >= mid
    cols = np.flatnonzero(high[1:] != high[:-1]) + 1
    rising = high[cols]
    if subpixel:
        prev = line[cols - 1].astype(np.float64)
        cur = line[cols].astype(np.float64)
        points = (cols - 1) + (mid - prev) / (cur - prev)
    else:
        points = cols.astype(np.float64)
    return points, rising


def detect_transitions(frame: Frame, subpixel: bool = False) -> TransitionSet:
    """Mid-level crossings on every line.

    A crossing is recorded at the first column whose sample lies on the
    other side of (low + high) / 2 from its predecessor. With ``subpixel``
    the position is linearly interpolated between the two samples instead.
    The transition count is taken from line 0 and enforced on all lines.
    """
    low, high = plateaus(frame)
    mid = (low + high) / 2
    rows, polarity = [], None
    bad, bad_counts = [], []
    for k, line in enumerate(frame.samples):
        points, rising = _line_crossings(line, mid, subpixel)
        if polarity is None:
            polarity = tuple("rising" if r else "falling" for r in rising)
        if len(points) != len(polarity):
            bad.append(k)
            bad_counts.append(len(points))
            continue
        rows.append(points)
    if bad:
        raise InconsistentTransitionsError(len(polarity), bad, bad_counts)
    if not polarity:
        raise NoTransitionsError("no mid-level crossings found on line 0")
    return TransitionSet(np.vstack(rows), polarity, frame.width)


def transition_means(tset: TransitionSet) -> np.ndarray:
    return tset.points.mean(axis=0)


def sync_accuracy(tset: TransitionSet) -> SyncReport:
    """Mean absolute deviation of the transition points from their per-transition
    means, averaged over transitions (points/transition)."""
    means = transition_means(tset)
    per_q = np.abs(tset.points - means[None, :]).mean(axis=0)
    return SyncReport(
        means=[float(m) for m in means],
        accuracy=float(per_q.mean()),
        per_transition_deviation=[float(d) for d in per_q],
        q_count=tset.q_count,
        n_lines=tset.n_lines,
    )
