"""Loading, decoding and encoding of overhead image sequences.

Frames are binary netpbm rasters (PPM P6 / PGM P5, maxval 255) named
``<stem>_<N>.ppm`` / ``.pgm``; a directory of them becomes a FrameSequence
with timestamps assigned from the frame rate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DecodeError, SequenceError

_FRAME_NAME = re.compile(r"^(?P<stem>.*)_(?P<num>\d+)\.(?P<ext>ppm|pgm)$")

# whitespace bytes recognized by the netpbm header grammar
_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass(frozen=True)
class Frame:
    """One RGB raster. Immutable; safe to share across workers.

    ``rgb`` is a read-only (height, width, 3) uint8 array in row-major
    order, pixel (x, y) at rgb[y, x].
    """

    index: int
    width_px: int
    height_px: int
    rgb: np.ndarray
    timestamp_s: float = 0.0

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"frame index must be nonnegative, got {self.index}")
        if self.rgb.shape != (self.height_px, self.width_px, 3):
            raise ValueError(
                f"pixel buffer shape {self.rgb.shape} does not match "
                f"{self.width_px}x{self.height_px} RGB"
            )
        self.rgb.setflags(write=False)

    def with_index(self, index: int, fps: float) -> "Frame":
        return Frame(index, self.width_px, self.height_px, self.rgb, index / fps)


@dataclass
class FrameSequence:
    """Ordered frames of equal size, indexed contiguously from 0."""

    frames: list[Frame] = field(default_factory=list)
    fps: float = 30.0
    source_dir: str = ""

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    @property
    def width_px(self) -> int:
        return self.frames[0].width_px

    @property
    def height_px(self) -> int:
        return self.frames[0].height_px


def _read_token(data: bytes, pos: int, what: str) -> tuple[bytes, int]:
    """Read one whitespace-delimited header token, skipping # comments."""
    n = len(data)
    while pos < n:
        if data[pos : pos + 1] in _WHITESPACE:
            pos += 1
        elif data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise DecodeError(f"unexpected end of header while reading {what}", pos)
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE:
        pos += 1
    return data[start:pos], pos


def _parse_int_token(data: bytes, pos: int, what: str) -> tuple[int, int, int]:
    token, end = _read_token(data, pos, what)
    start = end - len(token)
    if not token.isdigit():
        raise DecodeError(f"invalid {what} token {token!r}", start)
    return int(token), start, end


def decode_frame(data: bytes, index: int = 0, fps: float = 30.0) -> Frame:
    """Decode binary PPM (P6) or PGM (P5) bytes into a Frame.

    PGM gray values are replicated to (g, g, g). Only maxval 255 is
    accepted. Errors name the byte offset of the problem.
    """
    magic = data[:2]
    if magic not in (b"P6", b"P5"):
        raise DecodeError(f"unsupported magic number {magic!r}", 0)
    width, w_off, pos = _parse_int_token(data, 2, "width")
    height, h_off, pos = _parse_int_token(data, pos, "height")
    maxval, m_off, pos = _parse_int_token(data, pos, "maxval")
    if width <= 0 or height <= 0:
        raise DecodeError(f"dimensions must be positive, got {width}x{height}", w_off)
    if maxval != 255:
        raise DecodeError(f"unsupported maxval {maxval}, expected 255", m_off)
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise DecodeError("expected single whitespace byte after maxval", pos)
    pos += 1

    channels = 3 if magic == b"P6" else 1
    expected = width * height * channels
    raster = data[pos:]
    if len(raster) < expected:
        raise DecodeError(
            f"truncated pixel data: expected {expected} bytes, got {len(raster)}",
            pos + len(raster),
        )
    if len(raster) > expected:
        raise DecodeError("trailing data after pixel raster", pos + expected)

    buf = np.frombuffer(raster, dtype=np.uint8)
    if channels == 3:
        rgb = buf.reshape(height, width, 3)
    else:
        rgb = np.repeat(buf.reshape(height, width, 1), 3, axis=2)
    return Frame(index, width, height, rgb.copy(), index / fps)


def encode_frame(frame: Frame) -> bytes:
    """Encode a Frame as canonical binary PPM (P6, maxval 255)."""
    header = f"P6 {frame.width_px} {frame.height_px} 255\n".encode("ascii")
    return header + frame.rgb.tobytes()


def _scan_dir(dir_path: Path) -> list[tuple[int, Path]]:
    numbered = []
    seen: dict[int, Path] = {}
    for path in dir_path.iterdir():
        m = _FRAME_NAME.match(path.name)
        if m is None:
            continue
        num = int(m.group("num"))
        if num in seen:
            raise SequenceError(
                f"duplicate frame number {num}: {seen[num].name} and {path.name}"
            )
        seen[num] = path
        numbered.append((num, path))
    numbered.sort(key=lambda item: item[0])
    return numbered


def load_sequence(dir_path: str | Path, fps: float = 30.0) -> FrameSequence:
    """Load all ``<stem>_<N>.ppm/.pgm`` files under dir_path, sorted by N.

    The numeric suffixes must form a contiguous range; indices are
    reassigned from 0 and timestamps set to index / fps.
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise SequenceError(f"not a directory: {dir_path}")
    numbered = _scan_dir(dir_path)
    if not numbered:
        raise SequenceError(f"no frame files (<stem>_<N>.ppm/.pgm) in {dir_path}")

    first = numbered[0][0]
    for offset, (num, path) in enumerate(numbered):
        if num != first + offset:
            raise SequenceError(
                f"gap in frame numbering: index {first + offset} missing "
                f"(next file is {path.name})"
            )

    frames: list[Frame] = []
    for idx, (_, path) in enumerate(numbered):
        try:
            frame = decode_frame(path.read_bytes(), index=idx, fps=fps)
        except DecodeError as exc:
            raise DecodeError(f"{path.name}: {exc.message}", exc.offset) from exc
        if frames and (
            frame.width_px != frames[0].width_px
            or frame.height_px != frames[0].height_px
        ):
            raise SequenceError(
                f"mixed frame dimensions: {path.name} is "
                f"{frame.width_px}x{frame.height_px}, expected "
                f"{frames[0].width_px}x{frames[0].height_px}"
            )
        frames.append(frame)
    return FrameSequence(frames=frames, fps=fps, source_dir=str(dir_path))


def write_sequence(frames: list[Frame], dir_path: str | Path, stem: str) -> list[Path]:
    """Write frames as ``<stem>_<NNNNN>.ppm`` files; returns the paths."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    paths = []
    for frame in frames:
        path = dir_path / f"{stem}_{frame.index:05d}.ppm"
        path.write_bytes(encode_frame(frame))
        paths.append(path)
    return paths
