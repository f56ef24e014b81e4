"""Dark-pixel head detection.

A fixed-size bounding box is swept over the frame in raster order; a
position whose black-pixel count reaches the minimum becomes a candidate
head, is refined by searching the vicinity margin and recentering on the
center of mass, and then claims its region so later positions overlapping
it beyond the overlap margin are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyObjectError, RefinementError
from .frame_io import Frame


@dataclass(frozen=True)
class DetectionParams:
    """Per-scenario detection and tracking thresholds.

    box_w/box_h: scan and track window size in pixels.
    black_max: inclusive per-channel cap for a pixel to count as black.
    min_black_count: black pixels required for a valid head.
    vicinity_margin: extra pixels searched around a box before recentering.
    max_step: largest allowed per-frame movement of a tracked center of mass.
    overlap_margin: per-axis box overlap tolerated before suppression.
    scan_stride: raster scan step; small versus the head size so no head
        is skipped, large enough to keep scanning cheap.
    """

    box_w: int
    box_h: int
    black_max: int
    min_black_count: int
    vicinity_margin: int
    max_step: int
    overlap_margin: int
    scan_stride: int = 10

    def __post_init__(self):
        if self.box_w <= 0 or self.box_h <= 0:
            raise ValueError("box dimensions must be positive")
        if not 0 <= self.black_max <= 255:
            raise ValueError(f"black_max must be in 0..255, got {self.black_max}")
        if self.min_black_count <= 0:
            raise ValueError("min_black_count must be positive")
        if self.min_black_count > self.box_w * self.box_h:
            raise ValueError("min_black_count cannot exceed the box area")
        if self.vicinity_margin < 0:
            raise ValueError("vicinity_margin must be nonnegative")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if not 0 <= self.overlap_margin < min(self.box_w, self.box_h):
            raise ValueError("overlap_margin must be nonnegative and smaller than the box")
        if self.scan_stride <= 0:
            raise ValueError("scan_stride must be positive")


#: Shipped per-scenario presets (box w, box h, black max, min count,
#: vicinity margin, max step, overlap margin).
PRESETS: dict[str, DetectionParams] = {
    "scenario1": DetectionParams(50, 50, 25, 300, 0, 17, 7),
    "scenario2": DetectionParams(50, 50, 22, 450, 6, 30, 20),
    "scenario3": DetectionParams(40, 40, 30, 600, 0, 30, 20),
    "scenario4": DetectionParams(40, 40, 30, 450, 0, 30, 20),
}

_PRESET_ALIASES = {f"s{i}": f"scenario{i}" for i in range(1, 5)}


def get_preset(name: str) -> DetectionParams:
    """Look up a shipped preset by name (``scenario1``..``scenario4`` or ``s1``..``s4``)."""
    key = _PRESET_ALIASES.get(name.lower(), name.lower())
    if key not in PRESETS:
        valid = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; valid presets: {valid}")
    return PRESETS[key]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box; (x, y) is the top-left corner."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box size must be positive, got {self.w}x{self.h}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def center(self) -> tuple[float, float]:
        # pixel-center convention: a box over columns x..x+w-1 is centered
        # on the mean column index
        return (self.x + (self.w - 1) / 2.0, self.y + (self.h - 1) / 2.0)

    def expanded(self, margin: int, frame_w: int, frame_h: int) -> "BoundingBox":
        """Grow by margin on all sides, clamped to the frame."""
        x1 = max(self.x - margin, 0)
        y1 = max(self.y - margin, 0)
        x2 = min(self.x2 + margin, frame_w)
        y2 = min(self.y2 + margin, frame_h)
        return BoundingBox(x1, y1, x2 - x1, y2 - y1)

    def inside(self, frame_w: int, frame_h: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x2 <= frame_w and self.y2 <= frame_h


def centered_box(cx: float, cy: float, w: int, h: int,
                 frame_w: int, frame_h: int) -> BoundingBox:
    """Box of size (w, h) centered on (cx, cy), clamped inside the frame."""
    x = math.floor(cx - (w - 1) / 2.0 + 0.5)
    y = math.floor(cy - (h - 1) / 2.0 + 0.5)
    x = min(max(x, 0), max(frame_w - w, 0))
    y = min(max(y, 0), max(frame_h - h, 0))
    return BoundingBox(x, y, min(w, frame_w), min(h, frame_h))


def boxes_overlap(a: BoundingBox, b: BoundingBox, margin: int) -> bool:
    """True if the intersection exceeds margin pixels in both width and height."""
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    return iw > margin and ih > margin


@dataclass(frozen=True)
class Candidate:
    """A detected head: its box, black-pixel count, and center of mass."""

    box: BoundingBox
    black_count: int
    com: tuple[float, float]


def is_black_pixel(rgb: tuple[int, int, int], black_max: int) -> bool:
    """Inclusive per-channel cap: every channel at or below black_max."""
    return max(rgb) <= black_max


def _black_mask(rgb: np.ndarray, black_max: int) -> np.ndarray:
    # pairwise maxima beat a reduction over the tiny channel axis
    return np.maximum(np.maximum(rgb[:, :, 0], rgb[:, :, 1]), rgb[:, :, 2]) <= black_max


def count_black_pixels(frame: Frame, box: BoundingBox, black_max: int) -> int:
    if not box.inside(frame.width_px, frame.height_px):
        raise ValueError(
            f"box {box} extends outside the {frame.width_px}x{frame.height_px} frame"
        )
    sub = frame.rgb[box.y : box.y2, box.x : box.x2]
    return int(_black_mask(sub, black_max).sum())


def center_of_mass(frame: Frame, box: BoundingBox, black_max: int) -> tuple[float, float]:
    """Unweighted mean (x, y) of the qualifying pixels inside the box."""
    if not box.inside(frame.width_px, frame.height_px):
        raise ValueError(
            f"box {box} extends outside the {frame.width_px}x{frame.height_px} frame"
        )
    sub = frame.rgb[box.y : box.y2, box.x : box.x2]
    ys, xs = np.nonzero(_black_mask(sub, black_max))
    if xs.size == 0:
        raise EmptyObjectError(f"no pixels at or below {black_max} inside {box}")
    return (box.x + float(xs.mean()), box.y + float(ys.mean()))


class FrameMask:
    """Black-pixel mask of one frame plus an integral image for O(1) box counts.

    Built once per (frame, black_max) pair; shared by the scanner and the
    tracker so both count pixels identically.
    """

    def __init__(self, frame: Frame, black_max: int):
        self.frame = frame
        self.black_max = black_max
        self.mask = _black_mask(frame.rgb, black_max)
        # int32 is enough: the count is bounded by the pixel count
        ii = np.zeros((frame.height_px + 1, frame.width_px + 1), dtype=np.int32)
        np.cumsum(self.mask, axis=0, out=ii[1:, 1:])
        np.cumsum(ii[1:, 1:], axis=1, out=ii[1:, 1:])
        self._ii = ii

    def count(self, box: BoundingBox) -> int:
        ii = self._ii
        return int(
            ii[box.y2, box.x2] - ii[box.y, box.x2] - ii[box.y2, box.x] + ii[box.y, box.x]
        )

    def com(self, box: BoundingBox) -> tuple[float, float]:
        ys, xs = np.nonzero(self.mask[box.y : box.y2, box.x : box.x2])
        if xs.size == 0:
            raise EmptyObjectError(
                f"no pixels at or below {self.black_max} inside {box}"
            )
        return (box.x + float(xs.mean()), box.y + float(ys.mean()))


def refine_candidate(frame: Frame, box: BoundingBox, params: DetectionParams,
                     mask: FrameMask | None = None) -> Candidate:
    """Search the vicinity margin around a hit and recenter the box on it.

    The box grows by vicinity_margin (clamped to the frame), the center of
    mass over that region picks the new box center, and count and com are
    recomputed for the recentered box.
    """
    if mask is None:
        mask = FrameMask(frame, params.black_max)
    expanded = box.expanded(params.vicinity_margin, frame.width_px, frame.height_px)
    cx, cy = mask.com(expanded)
    newbox = centered_box(cx, cy, params.box_w, params.box_h,
                          frame.width_px, frame.height_px)
    count = mask.count(newbox)
    if count == 0:
        raise RefinementError(f"recentered box {newbox} contains no qualifying pixels")
    return Candidate(newbox, count, mask.com(newbox))


def _scan_positions(limit: int, size: int, stride: int) -> list[int]:
    # regular grid plus the final clamped position so border content is reachable
    last = max(limit - size, 0)
    positions = list(range(0, last + 1, stride))
    if positions[-1] != last:
        positions.append(last)
    return positions


def scan_frame(frame: Frame, params: DetectionParams,
               claimed: list[BoundingBox] | None = None,
               mask: FrameMask | None = None) -> list[Candidate]:
    """Raster-order sweep for candidate heads.

    Positions overlapping a claimed box by more than overlap_margin along
    both axes are skipped; every emitted candidate claims its refined box
    for the remainder of the scan. Deterministic for fixed inputs.
    """
    if mask is None:
        mask = FrameMask(frame, params.black_max)
    w, h = frame.width_px, frame.height_px
    box_w, box_h = min(params.box_w, w), min(params.box_h, h)
    claims: list[BoundingBox] = list(claimed) if claimed else []
    candidates: list[Candidate] = []

    xs = _scan_positions(w, box_w, params.scan_stride)
    ys = _scan_positions(h, box_h, params.scan_stride)
    ii = mask._ii
    counts = (
        ii[np.ix_([y + box_h for y in ys], [x + box_w for x in xs])]
        - ii[np.ix_([y + box_h for y in ys], xs)]
        - ii[np.ix_(ys, [x + box_w for x in xs])]
        + ii[np.ix_(ys, xs)]
    )

    for yi, y in enumerate(ys):
        for xi, x in enumerate(xs):
            if counts[yi, xi] < params.min_black_count:
                continue
            box = BoundingBox(x, y, box_w, box_h)
            if any(boxes_overlap(box, c, params.overlap_margin) for c in claims):
                continue
            raw = Candidate(box, int(counts[yi, xi]), mask.com(box))
            try:
                cand = refine_candidate(frame, box, params, mask=mask)
            except RefinementError:
                cand = raw
            if cand.black_count < params.min_black_count:
                # refinement drifted off the head; keep the qualifying hit
                cand = raw
            candidates.append(cand)
            claims.append(cand.box)
    return candidates
