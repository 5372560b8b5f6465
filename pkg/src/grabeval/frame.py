"""Frame type and capture-file I/O (binary PGM and headerless raw dumps)."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

FORMAT_KINDS = ("pgm_binary", "raw8", "raw16le")


class FrameError(ValueError):
    """Base class for invalid frames and unreadable capture files."""


class MalformedHeaderError(FrameError):
    pass


class SizeMismatchError(FrameError):
    pass


class SampleRangeError(FrameError):
    pass


class DepthIncompatibleError(FrameError):
    pass


@dataclass(frozen=True, eq=False)
class Frame:
    """Immutable grid of grey codes, ``samples[i, j]`` = line i, column j.

    Samples are stored as a read-only ``uint16`` array of shape
    ``(height, width)``.
    """

    samples: np.ndarray
    bit_depth: int = 8
    width: int = field(init=False)
    height: int = field(init=False)

    def __post_init__(self):
        if not 1 <= int(self.bit_depth) <= 16:
            raise FrameError(f"bit_depth must be in 1..16, got {self.bit_depth}")
        arr = np.asarray(self.samples)
        if arr.ndim != 2:
            raise FrameError(f"samples must be 2-D, got shape {arr.shape}")
        height, width = arr.shape
        if width < 2 or height < 2:
            raise FrameError(f"frame must be at least 2x2, got {width}x{height}")
        if arr.dtype.kind not in "iu":
            if arr.dtype.kind == "b" or not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
                raise FrameError("samples must be integer grey codes")
        if arr.size:
            lo, hi = int(arr.min()), int(arr.max())
            maxcode = (1 << int(self.bit_depth)) - 1
            if lo < 0 or hi > maxcode:
                raise SampleRangeError(
                    f"samples span [{lo}, {hi}], outside [0, {maxcode}] for {self.bit_depth}-bit frame"
                )
        data = np.array(arr, dtype=np.uint16, copy=True)
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "bit_depth", int(self.bit_depth))
        object.__setattr__(self, "width", int(width))
        object.__setattr__(self, "height", int(height))

    @property
    def max_code(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def transposed(self) -> "Frame":
        return Frame(self.samples.T, self.bit_depth)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.bit_depth == other.bit_depth
            and self.shape == other.shape
            and bool(np.array_equal(self.samples, other.samples))
        )

    def __hash__(self):
        return hash((self.bit_depth, self.shape, self.samples.tobytes()))

    def __repr__(self):
        return f"Frame({self.width}x{self.height}, {self.bit_depth}-bit)"


@dataclass(frozen=True)
class FormatSpec:
    """How a capture file is laid out on disk.

    Raw kinds carry no header, so ``width``, ``height`` and ``bit_depth``
    are mandatory for them. For ``pgm_binary`` they are ignored on load.
    """

    kind: str = "pgm_binary"
    width: Optional[int] = None
    height: Optional[int] = None
    bit_depth: Optional[int] = None

    def __post_init__(self):
        if self.kind not in FORMAT_KINDS:
            raise ValueError(f"unknown format kind {self.kind!r}; expected one of {FORMAT_KINDS}")
        if self.kind != "pgm_binary":
            if self.width is None or self.height is None or self.bit_depth is None:
                raise ValueError(f"{self.kind} requires explicit width, height and bit_depth")
            if self.kind == "raw8" and not 1 <= self.bit_depth <= 8:
                raise DepthIncompatibleError(f"raw8 holds at most 8-bit samples, got {self.bit_depth}")

    @property
    def bytes_per_sample(self) -> int:
        return 2 if self.kind == "raw16le" else 1


_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _parse_pgm_header(data: bytes) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, payload offset)."""
    if data[:2] != b"P5":
        raise MalformedHeaderError(f"PGM magic must be 'P5', got {data[:2]!r}")
    pos = 2
    values = []
    for _ in range(3):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeaderError("truncated PGM header")
        token = m.group(1)
        if not token.isdigit():
            raise MalformedHeaderError(f"non-numeric PGM header field {token!r}")
        values.append(int(token))
        pos = m.end()
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise MalformedHeaderError("missing whitespace after PGM maxval")
    width, height, maxval = values
    if not 0 < maxval <= 65535:
        raise MalformedHeaderError(f"PGM maxval must be in 1..65535, got {maxval}")
    return width, height, maxval, pos + 1


def load_frame(path, spec: Optional[FormatSpec] = None) -> Frame:
    """Read a capture file into a :class:`Frame`.

    Raises FileNotFoundError, MalformedHeaderError, SizeMismatchError or
    SampleRangeError. Frames are validated in full before being returned.
    """
    spec = spec or FormatSpec()
    data = Path(path).read_bytes()

    if spec.kind == "pgm_binary":
        width, height, maxval, offset = _parse_pgm_header(data)
        bit_depth = maxval.bit_length()
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = data[offset:]
        expected = width * height * dtype.itemsize
        if len(payload) != expected:
            raise SizeMismatchError(
                f"PGM payload is {len(payload)} bytes, header implies {expected}"
            )
        samples = np.frombuffer(payload, dtype=dtype).reshape(height, width)
        if samples.size and int(samples.max()) > maxval:
            raise SampleRangeError(f"sample {int(samples.max())} exceeds PGM maxval {maxval}")
    else:
        width, height, bit_depth = spec.width, spec.height, spec.bit_depth
        dtype = np.dtype("<u2") if spec.kind == "raw16le" else np.dtype("u1")
        expected = width * height * dtype.itemsize
        if len(data) != expected:
            raise SizeMismatchError(
                f"{path}: {len(data)} bytes, expected {expected} for {width}x{height} {spec.kind}"
            )
        samples = np.frombuffer(data, dtype=dtype).reshape(height, width)

    return Frame(samples, bit_depth)


def save_frame(frame: Frame, path, spec: Optional[FormatSpec] = None) -> None:
    """Write ``frame`` so that ``load_frame(path, spec) == frame``.

    PGM files get ``maxval = 2**bit_depth - 1``, which is how the bit depth
    survives the round trip. For raw kinds the spec's bit_depth must equal
    the frame's.
    """
    spec = spec or FormatSpec()
    if spec.kind == "pgm_binary":
        maxval = frame.max_code
        dtype = ">u2" if maxval > 255 else "u1"
        header = f"P5\n{frame.width} {frame.height}\n{maxval}\n".encode("ascii")
        payload = header + frame.samples.astype(dtype).tobytes()
    else:
        if spec.kind == "raw8" and frame.bit_depth > 8:
            raise DepthIncompatibleError(f"raw8 cannot hold a {frame.bit_depth}-bit frame")
        if spec.bit_depth is not None and spec.bit_depth != frame.bit_depth:
            raise DepthIncompatibleError(
                f"format declares {spec.bit_depth}-bit samples, frame is {frame.bit_depth}-bit"
            )
        if (spec.width, spec.height) != (None, None) and (spec.width, spec.height) != (frame.width, frame.height):
            raise SizeMismatchError(
                f"format declares {spec.width}x{spec.height}, frame is {frame.width}x{frame.height}"
            )
        dtype = "<u2" if spec.kind == "raw16le" else "u1"
        payload = frame.samples.astype(dtype).tobytes()

    Path(path).write_bytes(payload)


def format_for_path(path, width=None, height=None, bit_depth=None) -> FormatSpec:
    """Guess a FormatSpec from the file extension (``.pgm``, ``.raw``, ``.raw16``)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".raw16", ".r16"):
        return FormatSpec("raw16le", width, height, bit_depth)
    if ext in (".raw", ".bin", ".r8"):
        return FormatSpec("raw8", width, height, bit_depth if bit_depth is not None else 8)
    return FormatSpec("pgm_binary", width, height, bit_depth)
