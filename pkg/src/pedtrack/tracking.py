"""Per-pedestrian track maintenance across frames.

Each active track is re-located inside its vicinity-expanded box, gated
on maximum per-frame displacement (failed gates hold the previous
position), and terminated once its box no longer holds enough black
pixels. New heads are admitted by the detection scan with the surviving
tracks' boxes pre-claimed, so an already-tracked head is never re-detected
within the same frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .detection import (
    BoundingBox,
    Candidate,
    DetectionParams,
    FrameMask,
    centered_box,
    scan_frame,
)
from .errors import EmptyObjectError
from .frame_io import Frame, FrameSequence

#: Consecutive held (gate-rejected) frames after which a track is dropped;
#: unbounded holding would freeze a ghost box on a departed pedestrian.
MAX_HELD_FRAMES = 3

#: Spawn-order palette for track markers. None of these qualify as black
#: under any shipped preset.
TRACK_COLORS: list[tuple[int, int, int]] = [
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207),
]


class Flag(str, Enum):
    MEASURED = "measured"
    HELD = "held"


@dataclass(frozen=True)
class TrackPoint:
    """One center-of-mass observation: held points repeat the previous one."""

    x: float
    y: float
    frame: int
    flag: Flag


def track_color(track_id: int) -> tuple[int, int, int]:
    base = TRACK_COLORS[track_id % len(TRACK_COLORS)]
    # lighten on each palette wrap so colors stay pairwise distinct
    lift = 16 * (track_id // len(TRACK_COLORS))
    return tuple(min(c + lift, 255) for c in base)


@dataclass
class Track:
    """One pedestrian identity with its full center-of-mass history."""

    id: int
    display_color: tuple[int, int, int]
    com_history: list[TrackPoint] = field(default_factory=list)
    current_box: BoundingBox = BoundingBox(0, 0, 1, 1)
    active: bool = True
    termination_frame: int | None = None
    _held_streak: int = 0

    @property
    def first_frame(self) -> int:
        return self.com_history[0].frame

    @property
    def last_frame(self) -> int:
        return self.com_history[-1].frame

    def com_at(self, frame_index: int) -> TrackPoint | None:
        offset = frame_index - self.first_frame
        if 0 <= offset < len(self.com_history):
            return self.com_history[offset]
        return None

    def box_at(self, frame_index: int, frame_w: int, frame_h: int) -> BoundingBox | None:
        """Reconstruct the track box at a past frame.

        The box recenters on every measured point and stays put on held
        ones, so replaying the history reproduces it exactly.
        """
        point = self.com_at(frame_index)
        if point is None:
            return None
        for offset in range(frame_index - self.first_frame, -1, -1):
            p = self.com_history[offset]
            if p.flag is Flag.MEASURED:
                return centered_box(p.x, p.y, self.current_box.w, self.current_box.h,
                                    frame_w, frame_h)
        return None


@dataclass
class TrackerState:
    """Single-owner tracker state folded over the frame sequence."""

    tracks: list[Track] = field(default_factory=list)
    next_id: int = 0
    frame_index: int = -1

    @property
    def active_tracks(self) -> list[Track]:
        return [t for t in self.tracks if t.active]


def is_out_of_scene(frame: Frame, box: BoundingBox, params: DetectionParams,
                    mask: FrameMask | None = None) -> bool:
    """A box no longer represents a head once its black count falls below the minimum."""
    if mask is None:
        mask = FrameMask(frame, params.black_max)
    return mask.count(box) < params.min_black_count


def _spawn(state: TrackerState, cand: Candidate, frame_index: int) -> Track:
    track = Track(
        id=state.next_id,
        display_color=track_color(state.next_id),
        com_history=[TrackPoint(cand.com[0], cand.com[1], frame_index, Flag.MEASURED)],
        current_box=cand.box,
    )
    state.next_id += 1
    state.tracks.append(track)
    return track


def step(state: TrackerState, frame: Frame, params: DetectionParams) -> TrackerState:
    """Advance the tracker by one frame, mutating and returning the state.

    Existing tracks update in ascending id order before new detections are
    admitted, so established tracks win the claimed-region registry.
    """
    expected = state.frame_index + 1 if state.frame_index >= 0 else 0
    if frame.index != expected:
        raise ValueError(
            f"out-of-order frame: got index {frame.index}, expected {expected}"
        )
    mask = FrameMask(frame, params.black_max)
    w, h = frame.width_px, frame.height_px
    claims: list[BoundingBox] = []

    for track in sorted(state.active_tracks, key=lambda t: t.id):
        prev = track.com_history[-1]
        vicinity = track.current_box.expanded(params.vicinity_margin, w, h)
        new_com = None
        try:
            new_com = mask.com(vicinity)
        except EmptyObjectError:
            pass

        if new_com is not None and math.dist(new_com, (prev.x, prev.y)) <= params.max_step:
            track.current_box = centered_box(new_com[0], new_com[1],
                                             track.current_box.w, track.current_box.h,
                                             w, h)
            track.com_history.append(
                TrackPoint(new_com[0], new_com[1], frame.index, Flag.MEASURED))
            track._held_streak = 0
        else:
            # erroneous frame: reuse the previous center of mass, box stays
            track.com_history.append(
                TrackPoint(prev.x, prev.y, frame.index, Flag.HELD))
            track._held_streak += 1

        if mask.count(track.current_box) < params.min_black_count:
            track.active = False
            track.termination_frame = frame.index
        elif track._held_streak >= MAX_HELD_FRAMES:
            track.active = False
            track.termination_frame = frame.index
        else:
            claims.append(track.current_box)

    for cand in scan_frame(frame, params, claimed=claims, mask=mask):
        _spawn(state, cand, frame.index)

    state.frame_index = frame.index
    return state


def run(sequence: FrameSequence, params: DetectionParams) -> list[Track]:
    """Fold step over the whole sequence; returns all tracks with full histories."""
    if len(sequence) == 0:
        raise ValueError("cannot track an empty sequence")
    state = TrackerState()
    for frame in sequence:
        step(state, frame, params)
    return state.tracks
