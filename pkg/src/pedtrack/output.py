"""Presentation artifacts: annotated frames, CSV export, and SVG charts.

Annotated frames carry white box outlines and per-track trajectory
polylines; trajectories and chart lines are colored by travel direction
(one hue family per sign of net x-displacement). All outputs are
deterministic text or raster bytes for a fixed input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibration import SceneCalibration
from .frame_io import Frame
from .kinematics import KinematicsSeries, moving_average
from .tracking import Track

Color = tuple[int, int, int]

CSV_HEADER = "track_id,frame,t_s,x_px,y_px,x_m,y_m,step_m,cum_m,v_mps,a_mps2,flag"

# direction hue families: rightward travel in blues, leftward in reds
BLUE_SHADES: list[Color] = [
    (31, 119, 180), (65, 105, 225), (100, 149, 237),
    (70, 130, 180), (30, 90, 200), (120, 160, 230),
]
RED_SHADES: list[Color] = [
    (214, 39, 40), (220, 20, 60), (178, 34, 34),
    (255, 99, 71), (190, 60, 30), (240, 128, 128),
]


@dataclass(frozen=True)
class AnnotationStyle:
    box_outline: Color = (255, 255, 255)
    trajectory_palette: list[Color] = field(
        default_factory=lambda: BLUE_SHADES + RED_SHADES)
    line_thickness: int = 1


def net_dx(track: Track) -> float:
    return track.com_history[-1].x - track.com_history[0].x


def _family_shade(shades: list[Color], index: int) -> Color:
    base = shades[index % len(shades)]
    lift = 20 * (index // len(shades))
    return tuple(min(c + lift, 255) for c in base)


def trajectory_colors(tracks: list[Track]) -> dict[int, Color]:
    """Direction-keyed colors: blues for net rightward tracks, reds for leftward.

    A track with zero net x-displacement keeps its spawn display color.
    """
    colors: dict[int, Color] = {}
    blue_i = red_i = 0
    for track in sorted(tracks, key=lambda t: t.id):
        dx = net_dx(track)
        if dx > 0:
            colors[track.id] = _family_shade(BLUE_SHADES, blue_i)
            blue_i += 1
        elif dx < 0:
            colors[track.id] = _family_shade(RED_SHADES, red_i)
            red_i += 1
        else:
            colors[track.id] = track.display_color
    return colors


def distance_offsets(tracks: list[Track], rl_offset_m: float) -> dict[int, float]:
    """Distance-chart offsets: leftward-moving tracks start at rl_offset_m."""
    return {t.id: (rl_offset_m if net_dx(t) < 0 else 0.0) for t in tracks}


# --- frame annotation --------------------------------------------------------

def _stamp(rgb: np.ndarray, x: int, y: int, color: Color, thickness: int):
    h, w = rgb.shape[:2]
    if thickness <= 1:
        if 0 <= x < w and 0 <= y < h:
            rgb[y, x] = color
        return
    r = thickness // 2
    x0, x1 = max(x - r, 0), min(x + r + 1, w)
    y0, y1 = max(y - r, 0), min(y + r + 1, h)
    if x0 < x1 and y0 < y1:
        rgb[y0:y1, x0:x1] = color


def _draw_line(rgb: np.ndarray, p0: tuple[int, int], p1: tuple[int, int],
               color: Color, thickness: int = 1):
    """Bresenham segment, clipped at the frame border."""
    x0, y0 = p0
    x1, y1 = p1
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        _stamp(rgb, x0, y0, color, thickness)
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _draw_box_outline(rgb: np.ndarray, x: int, y: int, w: int, h: int, color: Color):
    hh, ww = rgb.shape[:2]
    x0, x1 = max(x, 0), min(x + w, ww)
    y0, y1 = max(y, 0), min(y + h, hh)
    if x0 >= x1 or y0 >= y1:
        return
    if 0 <= y < hh:
        rgb[y, x0:x1] = color
    if 0 <= y + h - 1 < hh:
        rgb[y + h - 1, x0:x1] = color
    if 0 <= x < ww:
        rgb[y0:y1, x] = color
    if 0 <= x + w - 1 < ww:
        rgb[y0:y1, x + w - 1] = color


def annotate_frame(frame: Frame, tracks: list[Track],
                   style: AnnotationStyle | None = None,
                   colors: dict[int, Color] | None = None) -> Frame:
    """Copy of the frame with trajectory polylines and white track boxes."""
    style = style or AnnotationStyle()
    if colors is None:
        colors = trajectory_colors(tracks)
    rgb = frame.rgb.copy()
    rgb.setflags(write=True)
    visible = [t for t in sorted(tracks, key=lambda t: t.id)
               if t.com_at(frame.index) is not None]

    for track in visible:
        points = [
            (round(p.x), round(p.y))
            for p in track.com_history
            if p.frame <= frame.index
        ]
        for a, b in zip(points, points[1:]):
            _draw_line(rgb, a, b, colors[track.id], style.line_thickness)
    for track in visible:
        box = track.box_at(frame.index, frame.width_px, frame.height_px)
        if box is not None:
            _draw_box_outline(rgb, box.x, box.y, box.w, box.h, style.box_outline)
    return Frame(frame.index, frame.width_px, frame.height_px, rgb, frame.timestamp_s)


# --- CSV export ---------------------------------------------------------------

def _fmt(value: float | None) -> str:
    return "" if value is None else format(value, ".6g")


def export_csv(series: list[KinematicsSeries], tracks: list[Track],
               cal: SceneCalibration, path: str | Path) -> Path:
    """One row per (track, frame); header is fixed; 6 significant digits."""
    by_id = {t.id: t for t in tracks}
    lines = [CSV_HEADER]
    for ks in sorted(series, key=lambda s: s.track_id):
        track = by_id[ks.track_id]
        for point, sample in zip(track.com_history, ks.samples):
            lines.append(",".join([
                str(ks.track_id),
                str(sample.frame),
                _fmt(sample.t_s),
                _fmt(point.x),
                _fmt(point.y),
                _fmt(point.x * cal.sx),
                _fmt(point.y * cal.sy),
                _fmt(sample.step_distance_m),
                _fmt(sample.cumulative_distance_m),
                _fmt(sample.velocity_mps),
                _fmt(sample.acceleration_mps2),
                point.flag.value,
            ]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


# --- SVG charts ---------------------------------------------------------------

QUANTITIES = {
    "distance": ("cumulative distance", "m"),
    "velocity": ("velocity", "m/s"),
    "acceleration": ("acceleration", "m/s²"),
}


def series_points(ks: KinematicsSeries, quantity: str,
                  offset: float = 0.0, smoothing: int = 0) -> list[tuple[float, float]]:
    """(t, value) pairs actually charted for one track."""
    if quantity == "distance":
        pts = [(s.t_s, s.cumulative_distance_m + offset) for s in ks.samples]
    elif quantity == "velocity":
        pts = [(s.t_s, s.velocity_mps) for s in ks.samples if s.velocity_mps is not None]
    elif quantity == "acceleration":
        pts = [(s.t_s, s.acceleration_mps2) for s in ks.samples
               if s.acceleration_mps2 is not None]
    else:
        raise ValueError(f"unknown chart quantity {quantity!r}")
    if smoothing > 1 and pts:
        values = moving_average([v for _, v in pts], smoothing)
        pts = [(t, v) for (t, _), v in zip(pts, values)]
    return pts


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if raw <= m * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(value: float) -> str:
    return format(value, ".6g")


def render_chart(series: list[KinematicsSeries], quantity: str,
                 colors: dict[int, Color] | None = None,
                 offsets: dict[int, float] | None = None,
                 smoothing: int = 0,
                 title: str | None = None,
                 size: tuple[int, int] = (800, 500)) -> str:
    """Self-contained SVG line chart, one polyline per track.

    Offsets (distance charts only) shift whole polylines so groups remain
    distinguishable; any nonzero offset is recorded in the legend.
    """
    if not series:
        raise ValueError("no series to chart")
    label, unit = QUANTITIES[quantity]
    offsets = offsets or {}
    per_track = [
        (ks.track_id, series_points(ks, quantity, offsets.get(ks.track_id, 0.0),
                                    smoothing))
        for ks in sorted(series, key=lambda s: s.track_id)
    ]
    per_track = [(tid, pts) for tid, pts in per_track if pts]
    if not per_track:
        raise ValueError(f"all series are empty for the {quantity} chart")
    if colors is None:
        colors = {}

    xs = [t for _, pts in per_track for t, _ in pts]
    ys = [v for _, pts in per_track for _, v in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        pad = max(abs(y_lo) * 0.1, 0.05)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    width, height = size
    ml, mr, mt, mb = 70, 180, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def px(t: float) -> float:
        return ml + (t - x_lo) / (x_hi - x_lo) * pw

    def py(v: float) -> float:
        return mt + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="24" font-family="sans-serif" font-size="16">'
        f'{title or label + " vs. time"}</text>',
        # axes
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" '
        'stroke="black" stroke-width="1"/>',
    ]
    for t in _nice_ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 5}" '
                   'stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{x:.2f}" y="{mt + ph + 20}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{_tick_label(t)}</text>')
    for v in _nice_ticks(y_lo, y_hi):
        y = py(v)
        out.append(f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" '
                   'stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.2f}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="end">{_tick_label(v)}</text>')
    out.append(f'<text x="{ml + pw / 2:.0f}" y="{height - 12}" '
               'font-family="sans-serif" font-size="13" text-anchor="middle">t (s)</text>')
    out.append(f'<text x="18" y="{mt + ph / 2:.0f}" font-family="sans-serif" '
               f'font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {mt + ph / 2:.0f})">{label} ({unit})</text>')

    for tid, pts in per_track:
        color = colors.get(tid, (60, 60, 60))
        points = " ".join(f"{px(t):.3f},{py(v):.3f}" for t, v in pts)
        out.append(f'<polyline fill="none" stroke="rgb{color}" stroke-width="1.5" '
                   f'points="{points}"/>')

    legend_x = ml + pw + 16
    for i, (tid, _) in enumerate(per_track):
        color = colors.get(tid, (60, 60, 60))
        y = mt + 14 + 18 * i
        note = ""
        if offsets.get(tid):
            note = f" (+{format(offsets[tid], '.6g')} {unit} offset)" \
                if quantity == "distance" else ""
        out.append(f'<rect x="{legend_x}" y="{y - 9}" width="12" height="12" '
                   f'fill="rgb{color}"/>')
        out.append(f'<text x="{legend_x + 18}" y="{y + 2}" font-family="sans-serif" '
                   f'font-size="12">track {tid}{note}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def chart_sidecar(series: list[KinematicsSeries], quantity: str,
                  offsets: dict[int, float] | None = None,
                  smoothing: int = 0) -> str:
    """Plain-data companion to a chart: ``track_id t value`` rows."""
    offsets = offsets or {}
    lines = [f"# {quantity} series", "# columns: track_id t_s value"]
    for ks in sorted(series, key=lambda s: s.track_id):
        for t, v in series_points(ks, quantity, offsets.get(ks.track_id, 0.0),
                                  smoothing):
            lines.append(f"{ks.track_id} {format(t, '.9g')} {format(v, '.9g')}")
    return "\n".join(lines) + "\n"
