"""Frame ingestion and rectangular cropping.

Frames are 8-bit luma rasters with a strictly increasing, gapless index
and a timestamp derived from the declared fps. Sources are an image
directory (numbered PGM/PNG files) or a headerless raw-luma pipe; codec
decoding is left to external tooling.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

import numpy as np


class FrameSourceError(Exception):
    """Unreadable source, inconsistent dimensions, or bad parameters."""


@dataclass(frozen=True)
class Frame:
    """One video frame: luma plane plus optional opaque chroma payload.

    Row 0 is the top of the image; row coordinates increase downward.
    Frames are immutable after creation and safe to share across threads.
    """

    index: int
    timestamp_ms: float
    luma: np.ndarray
    chroma: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("frame index must be >= 0")
        if self.luma.ndim != 2 or self.luma.dtype != np.uint8:
            raise ValueError("luma must be a 2-D uint8 array")
        if self.luma.shape[0] == 0 or self.luma.shape[1] == 0:
            raise ValueError("frame dimensions must be positive")
        self.luma.flags.writeable = False

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def width(self) -> int:
        return self.luma.shape[1]


@dataclass(frozen=True)
class CropSpec:
    """Fractions of the frame removed from each edge."""

    top: float = 0.0
    bottom: float = 0.0
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self) -> None:
        for name in ("top", "bottom", "left", "right"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"crop fraction {name}={v} outside [0, 1)")
        if self.top + self.bottom >= 1.0:
            raise ValueError("top + bottom crop must leave rows")
        if self.left + self.right >= 1.0:
            raise ValueError("left + right crop must leave columns")


ZERO_CROP = CropSpec()


@dataclass(frozen=True)
class BandSpec:
    """Fraction of frame height taken from the bottom edge."""

    band_fraction: float = 0.15

    def __post_init__(self) -> None:
        if not 0.0 < self.band_fraction <= 1.0:
            raise ValueError("band_fraction must be in (0, 1]")

    def rows(self, height: int) -> tuple[int, int]:
        """Half-open row interval [start, height) covered by the band."""
        n = max(1, int(self.band_fraction * height))
        return height - n, height


def crop(frame: Frame, spec: CropSpec) -> Frame:
    """Return the subframe left after removing the spec's edge fractions.

    Columns [floor(left*W), W - floor(right*W)) and rows
    [floor(top*H), H - floor(bottom*H)); the original frame is untouched.
    Chroma is luma-adjacent metadata and is not carried through crops.
    """
    h, w = frame.height, frame.width
    r0, r1 = int(spec.top * h), h - int(spec.bottom * h)
    c0, c1 = int(spec.left * w), w - int(spec.right * w)
    if r1 <= r0 or c1 <= c0:
        raise ValueError("crop spec leaves an empty region")
    return Frame(frame.index, frame.timestamp_ms, frame.luma[r0:r1, c0:c1])


def bottom_band(frame: Frame, band: BandSpec) -> Frame:
    """Return the bottom band_fraction rows of the frame."""
    r0, r1 = band.rows(frame.height)
    return Frame(frame.index, frame.timestamp_ms, frame.luma[r0:r1, :])


def crop_offsets(spec: CropSpec, width: int, height: int) -> tuple[int, int]:
    """(col, row) offset of the cropped region within the full frame."""
    return int(spec.left * width), int(spec.top * height)


class FrameStream:
    """Pull-based, single-consumer stream of frames in index order."""

    def __init__(self, frames: Iterable[Frame], fps: float) -> None:
        if fps <= 0:
            raise FrameSourceError("fps must be positive")
        self.fps = fps
        self._it = iter(frames)
        self._next_index = 0

    def __iter__(self) -> Iterator[Frame]:
        return self

    def __next__(self) -> Frame:
        frame = next(self._it)
        if frame.index != self._next_index:
            raise FrameSourceError(
                f"frame indices must be gapless: expected {self._next_index}, got {frame.index}"
            )
        self._next_index += 1
        return frame


def stream_from_arrays(arrays: Iterable[np.ndarray], fps: float) -> FrameStream:
    """Wrap an iterable of uint8 luma arrays as a FrameStream."""
    if fps <= 0:
        raise FrameSourceError("fps must be positive")

    def gen() -> Iterator[Frame]:
        shape = None
        for i, arr in enumerate(arrays):
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise FrameSourceError(
                    f"frame {i} dimensions {arr.shape} differ from {shape}"
                )
            yield Frame(i, i * 1000.0 / fps, np.ascontiguousarray(arr, dtype=np.uint8))

    return FrameStream(gen(), fps)


def write_pgm(luma: np.ndarray, path: str | Path) -> None:
    """Write a luma plane as binary (P5) PGM."""
    h, w = luma.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(luma, dtype=np.uint8).tobytes())


_NUMBERED = re.compile(r"(\d+)\.(pgm|png)$", re.IGNORECASE)


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise FrameSourceError(f"{path}: only binary (P5) PGM is supported")
    # Header: magic, width, height, maxval; '#' comments allowed between tokens.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FrameSourceError(f"{path}: malformed PGM header") from exc
    if maxval != 255:
        raise FrameSourceError(f"{path}: only 8-bit PGM is supported")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    if pixels.size != width * height:
        raise FrameSourceError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width).copy()


def _read_png(path: Path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:
        raise FrameSourceError(
            "PNG input requires pillow (pip install cricseg[png]); PGM needs no extras"
        ) from exc
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def _image_dir_frames(directory: Path) -> Iterator[np.ndarray]:
    entries = []
    for p in directory.iterdir():
        m = _NUMBERED.search(p.name)
        if m:
            entries.append((int(m.group(1)), p))
    if not entries:
        raise FrameSourceError(f"{directory}: no numbered .pgm/.png files found")
    entries.sort()
    for _, path in entries:
        if path.suffix.lower() == ".pgm":
            yield _read_pgm(path)
        else:
            yield _read_png(path)


def _raw_pipe_frames(fh: BinaryIO, width: int, height: int) -> Iterator[np.ndarray]:
    nbytes = width * height
    while True:
        buf = fh.read(nbytes)
        if not buf:
            return
        if len(buf) != nbytes:
            raise FrameSourceError(
                f"raw stream truncated: got {len(buf)} of {nbytes} bytes"
            )
        yield np.frombuffer(buf, dtype=np.uint8).reshape(height, width).copy()


def open_source(
    uri: str | Path | BinaryIO,
    fps: float,
    width: int | None = None,
    height: int | None = None,
) -> FrameStream:
    """Open an image-sequence directory or a raw-luma byte stream.

    Directories hold zero-padded numbered PGM/PNG files. A byte stream is
    headerless 8-bit luma, so width and height must be given.
    """
    if fps <= 0:
        raise FrameSourceError("fps must be positive")
    if hasattr(uri, "read"):
        if not width or not height:
            raise FrameSourceError("raw stream input needs explicit width and height")
        return stream_from_arrays(_raw_pipe_frames(uri, width, height), fps)
    path = Path(uri)
    if path.is_dir():
        return stream_from_arrays(_image_dir_frames(path), fps)
    raise FrameSourceError(f"{path}: not a readable frame directory")
