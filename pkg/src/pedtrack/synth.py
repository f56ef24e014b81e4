"""Deterministic synthetic overhead scenes with exact ground truth.

Actors are flat-shaded dark disks on a light background following
piecewise-linear waypoint paths. Five builtin scripts reproduce the
traffic cases the pipeline is meant to analyze: one-way flow,
bidirectional lanes, a U-turn with a slowed neighbor, counter-flow
crossings, and a single back-and-forth walker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ScriptError
from .frame_io import Frame, FrameSequence

Color = tuple[int, int, int]

DEFAULT_BACKGROUND: Color = (230, 230, 230)
DEFAULT_SHADE: Color = (10, 10, 10)


@dataclass(frozen=True)
class Waypoint:
    frame: int
    x: float
    y: float


@dataclass
class ActorPath:
    """One scripted walker: waypoints with linear interpolation between them."""

    actor_id: int
    waypoints: list[Waypoint]
    head_radius_px: float = 14.0
    head_shade: Color = DEFAULT_SHADE

    def __post_init__(self):
        if not self.waypoints:
            raise ScriptError(f"actor {self.actor_id} has no waypoints")
        frames = [w.frame for w in self.waypoints]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ScriptError(
                f"actor {self.actor_id}: waypoint frames must be strictly increasing"
            )
        if self.head_radius_px <= 0:
            raise ScriptError(f"actor {self.actor_id}: radius must be positive")

    def position_at(self, frame: int) -> tuple[float, float]:
        """Interpolated center; clamps to the endpoints outside the waypoint span."""
        wps = self.waypoints
        if frame <= wps[0].frame:
            return (wps[0].x, wps[0].y)
        if frame >= wps[-1].frame:
            return (wps[-1].x, wps[-1].y)
        for a, b in zip(wps, wps[1:]):
            if frame <= b.frame:
                u = (frame - a.frame) / (b.frame - a.frame)
                return (a.x + u * (b.x - a.x), a.y + u * (b.y - a.y))
        raise AssertionError("unreachable")


@dataclass
class ScenarioScript:
    """A renderable scene description; entirely data, no behavior model."""

    name: str
    actors: list[ActorPath]
    background: Color = DEFAULT_BACKGROUND
    width_px: int = 640
    height_px: int = 480
    n_frames: int = 300
    fps: float = 30.0
    rng_seed: int = 0
    jitter_px: float = 0.0
    #: actor_id -> (first, last) frame of a scripted slowdown, for verification
    slow_windows: dict[int, tuple[int, int]] = field(default_factory=dict)
    #: detection preset this scenario is tuned for
    preset: str = "scenario1"

    def __post_init__(self):
        if self.n_frames <= 0:
            raise ScriptError("frames must be positive")
        if self.width_px <= 0 or self.height_px <= 0:
            raise ScriptError("size must be positive")
        ids = [a.actor_id for a in self.actors]
        if len(ids) != len(set(ids)):
            raise ScriptError("duplicate actor ids")

    def jitter_offsets(self) -> np.ndarray:
        """(n_frames, n_actors, 2) per-frame position offsets, seeded."""
        shape = (self.n_frames, len(self.actors), 2)
        if self.jitter_px <= 0 or not self.actors:
            return np.zeros(shape)
        rng = np.random.default_rng(self.rng_seed)
        return rng.uniform(-self.jitter_px, self.jitter_px, size=shape)

    def rendered_positions(self) -> dict[int, list[tuple[float, float]]]:
        """Per-actor center actually drawn at each frame (jitter included)."""
        offsets = self.jitter_offsets()
        out: dict[int, list[tuple[float, float]]] = {}
        for ai, actor in enumerate(self.actors):
            positions = []
            for f in range(self.n_frames):
                x, y = actor.position_at(f)
                positions.append((x + offsets[f, ai, 0], y + offsets[f, ai, 1]))
            out[actor.actor_id] = positions
        return out


def _draw_disk(rgb: np.ndarray, cx: float, cy: float, radius: float, shade: Color):
    """Fill pixels whose centers lie within radius of (cx, cy); clips at edges."""
    h, w = rgb.shape[:2]
    x0 = max(math.ceil(cx - radius), 0)
    x1 = min(math.floor(cx + radius), w - 1)
    y0 = max(math.ceil(cy - radius), 0)
    y1 = min(math.floor(cy + radius), h - 1)
    if x0 > x1 or y0 > y1:
        return
    ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    inside = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius
    region = rgb[y0 : y1 + 1, x0 : x1 + 1]
    region[inside] = shade


def render_frame(script: ScenarioScript, frame_index: int,
                 positions: dict[int, list[tuple[float, float]]] | None = None) -> Frame:
    if positions is None:
        positions = script.rendered_positions()
    rgb = np.empty((script.height_px, script.width_px, 3), dtype=np.uint8)
    rgb[:] = script.background
    for actor in script.actors:
        x, y = positions[actor.actor_id][frame_index]
        if math.isnan(x) or math.isnan(y):
            raise ScriptError(
                f"actor {actor.actor_id} has NaN position at frame {frame_index}"
            )
        _draw_disk(rgb, x, y, actor.head_radius_px, actor.head_shade)
    return Frame(frame_index, script.width_px, script.height_px, rgb,
                 frame_index / script.fps)


def render_scenario(script: ScenarioScript) -> FrameSequence:
    """Render every frame; byte-identical output for identical script and seed."""
    positions = script.rendered_positions()
    frames = [render_frame(script, f, positions) for f in range(script.n_frames)]
    return FrameSequence(frames=frames, fps=script.fps, source_dir="")


def fully_visible(script: ScenarioScript, x: float, y: float, radius: float) -> bool:
    return (x - radius >= 0 and x + radius <= script.width_px - 1
            and y - radius >= 0 and y + radius <= script.height_px - 1)


def ground_truth(script: ScenarioScript) -> dict[int, list[tuple[int, float, float]]]:
    """Per-actor (frame, x, y) for every frame the head disk is fully in view.

    These are the exact centers the renderer draws, so they are the oracle
    for tracking accuracy.
    """
    positions = script.rendered_positions()
    truth: dict[int, list[tuple[int, float, float]]] = {}
    for actor in script.actors:
        rows = []
        for f in range(script.n_frames):
            x, y = positions[actor.actor_id][f]
            if fully_visible(script, x, y, actor.head_radius_px):
                rows.append((f, x, y))
        truth[actor.actor_id] = rows
    return truth


# --- builtin scenario construction -----------------------------------------

def _leg_waypoints(start: tuple[float, float],
                   legs: list[tuple[tuple[float, float], float]],
                   start_frame: int = 0) -> list[Waypoint]:
    """Waypoints for consecutive straight legs at given speeds (px/frame).

    Each leg's duration is rounded to whole frames, so the realized speed
    differs from the requested one by at most the rounding.
    """
    wps = [Waypoint(0, start[0], start[1])]
    if start_frame > 0:
        wps.append(Waypoint(start_frame, start[0], start[1]))
    f = start_frame
    x, y = start
    for (tx, ty), speed in legs:
        dist = math.hypot(tx - x, ty - y)
        f += max(1, round(dist / speed))
        wps.append(Waypoint(f, tx, ty))
        x, y = tx, ty
    return wps


def _ramp_waypoints(x0: float, y: float, f0: int, speeds: list[float]) -> list[Waypoint]:
    """One waypoint per frame along x with the given per-frame speeds."""
    wps = []
    x = x0
    for k, v in enumerate(speeds):
        x += v
        wps.append(Waypoint(f0 + k + 1, x, y))
    return wps


def _one_way() -> ScenarioScript:
    # three parallel lanes at 3 px/frame, staggered entries from the left
    actors = []
    for i, (x0, lane) in enumerate([(20, 120), (-80, 240), (-180, 360)]):
        actors.append(ActorPath(i, [Waypoint(0, x0, lane),
                                    Waypoint(299, x0 + 897, lane)]))
    return ScenarioScript(name="s1_one_way", actors=actors, preset="scenario1")


def _bidirectional() -> ScenarioScript:
    # two lanes per direction at 2 px/frame; everyone stays in view the
    # whole run so speeds never dip
    lanes = [
        (0, (21, 90), (619, 90)),
        (1, (21, 290), (619, 290)),
        (2, (619, 190), (21, 190)),
        (3, (619, 390), (21, 390)),
    ]
    actors = [ActorPath(i, [Waypoint(0, *a), Waypoint(299, *b)]) for i, a, b in lanes]
    return ScenarioScript(name="s2_bidirectional", actors=actors, preset="scenario2")


def _uturn() -> ScenarioScript:
    # actor 0 walks out, ramps down to a dead stop, returns and leaves;
    # actor 1 is scripted to slow while actor 0 passes back by it
    decel = [3.0 - 0.2 * k for k in range(1, 16)]    # 2.8 .. 0.0
    accel = [-0.2 * k for k in range(1, 16)]         # -0.2 .. -3.0

    p_wps = [Waypoint(0, 80, 160), Waypoint(100, 380, 160)]
    p_wps += _ramp_waypoints(380, 160, 100, decel)   # stops at x=401, f=115
    apex_x = p_wps[-1].x
    p_wps.append(Waypoint(118, apex_x, 160))         # brief dead stop
    p_wps += _ramp_waypoints(apex_x, 160, 118, accel)  # moving left at 3 by f=133
    back_x = p_wps[-1].x
    p_wps.append(Waypoint(273, back_x - 3 * 140, 160))

    n_wps = [Waypoint(0, -40, 280), Waypoint(150, 410, 280),
             Waypoint(190, 458, 280), Waypoint(299, 785, 280)]
    m_wps = [Waypoint(0, 20, 400), Waypoint(299, 917, 400)]

    actors = [
        ActorPath(0, p_wps, head_radius_px=15.0),
        ActorPath(1, n_wps, head_radius_px=15.0),
        ActorPath(2, m_wps, head_radius_px=15.0),
    ]
    return ScenarioScript(name="s3_uturn", actors=actors, preset="scenario3",
                          slow_windows={0: (100, 133), 1: (150, 190)})


def _counterflow() -> ScenarioScript:
    # four diagonal crossings through the middle at staggered times; each
    # actor bears right around the crossing and slows while inside it
    defs = [
        # (start, delay, legs): corner-to-corner diagonals crossing at a
        # north gate (actors 0/2) and a south gate (actors 1/3), entries
        # staggered so no two heads ever come near each other
        ((-20, 80), 0, [((300, 146), 3.0), ((340, 154), 1.5), ((700, 420), 3.0)]),
        ((-20, 430), 40, [((300, 334), 3.0), ((340, 326), 1.5), ((700, 60), 3.0)]),
        ((660, 80), 96, [((340, 146), 3.0), ((300, 154), 1.5), ((-60, 420), 3.0)]),
        ((660, 430), 127, [((340, 334), 3.0), ((300, 326), 1.5), ((-60, 60), 3.0)]),
    ]
    actors = []
    windows = {}
    for i, (start, delay, legs) in enumerate(defs):
        wps = _leg_waypoints(start, legs, start_frame=delay)
        actors.append(ActorPath(i, wps))
        # slowdown spans the middle leg
        windows[i] = (wps[-3].frame, wps[-2].frame)
    return ScenarioScript(name="s4_counterflow", actors=actors, preset="scenario4",
                          slow_windows=windows)


def _backforth() -> ScenarioScript:
    wps = [Waypoint(0, 121, 240), Waypoint(133, 520, 240),
           Waypoint(266, 121, 240), Waypoint(299, 220, 240)]
    return ScenarioScript(name="s5_backforth", actors=[ActorPath(0, wps)],
                          preset="scenario1")


_BUILDERS = {
    "s1": _one_way,
    "s2": _bidirectional,
    "s3": _uturn,
    "s4": _counterflow,
    "s5": _backforth,
}

_NAME_ALIASES = {
    "s1_one_way": "s1", "s2_bidirectional": "s2", "s3_uturn": "s3",
    "s4_counterflow": "s4", "s5_backforth": "s5",
}


def scenario_names() -> list[str]:
    return sorted(_BUILDERS)


def builtin_scenarios() -> list[ScenarioScript]:
    return [_BUILDERS[name]() for name in scenario_names()]


def get_scenario(name: str) -> ScenarioScript:
    key = _NAME_ALIASES.get(name.lower(), name.lower())
    if key not in _BUILDERS:
        raise KeyError(
            f"unknown scenario {name!r}; valid names: {', '.join(scenario_names())}"
        )
    return _BUILDERS[key]()


# --- script file format -----------------------------------------------------

def _parse_color(token: str, lineno: int) -> Color:
    parts = token.split(",")
    if len(parts) != 3:
        raise ScriptError(f"line {lineno}: expected r,g,b color, got {token!r}")
    try:
        r, g, b = (int(p) for p in parts)
    except ValueError:
        raise ScriptError(f"line {lineno}: non-integer color component in {token!r}")
    if not all(0 <= c <= 255 for c in (r, g, b)):
        raise ScriptError(f"line {lineno}: color component out of 0..255 in {token!r}")
    return (r, g, b)


def parse_script(text: str, name: str = "script") -> ScenarioScript:
    """Parse the flat one-record-per-line scenario format.

    Header lines: ``frames N``, ``size W H``, ``bg R,G,B``, ``seed S`` and
    optionally ``jitter PX``; then per actor an ``actor ID radius R shade
    R,G,B`` line followed by its ``wp FRAME X Y`` lines.
    """
    header: dict[str, object] = {}
    actors: list[ActorPath] = []
    pending_id: int | None = None
    pending_radius = 14.0
    pending_shade = DEFAULT_SHADE
    pending_wps: list[Waypoint] = []

    def flush(lineno: int):
        nonlocal pending_id, pending_wps
        if pending_id is None:
            return
        if not pending_wps:
            raise ScriptError(f"line {lineno}: actor {pending_id} has no wp lines")
        actors.append(ActorPath(pending_id, pending_wps, pending_radius, pending_shade))
        pending_id, pending_wps = None, []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0]
        try:
            if kind == "frames":
                header["n_frames"] = int(fields[1])
            elif kind == "size":
                header["width_px"], header["height_px"] = int(fields[1]), int(fields[2])
            elif kind == "bg":
                header["background"] = _parse_color(fields[1], lineno)
            elif kind == "seed":
                header["rng_seed"] = int(fields[1])
            elif kind == "jitter":
                header["jitter_px"] = float(fields[1])
            elif kind == "actor":
                flush(lineno)
                if len(fields) != 6 or fields[2] != "radius" or fields[4] != "shade":
                    raise ScriptError(
                        f"line {lineno}: expected 'actor ID radius R shade R,G,B'"
                    )
                pending_id = int(fields[1])
                pending_radius = float(fields[3])
                pending_shade = _parse_color(fields[5], lineno)
            elif kind == "wp":
                if pending_id is None:
                    raise ScriptError(f"line {lineno}: wp before any actor line")
                pending_wps.append(
                    Waypoint(int(fields[1]), float(fields[2]), float(fields[3])))
            else:
                raise ScriptError(f"line {lineno}: unknown record {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ScriptError(f"line {lineno}: cannot parse {line!r}: {exc}") from exc
    flush(lineno if text else 0)

    if "n_frames" not in header:
        raise ScriptError("missing 'frames' header line")
    try:
        return ScenarioScript(name=name, actors=actors, **header)  # type: ignore[arg-type]
    except ScriptError:
        raise
    except TypeError as exc:
        raise ScriptError(f"invalid script header: {exc}") from exc


def format_script(script: ScenarioScript) -> str:
    """Serialize a script back to the flat text format."""
    lines = [
        f"frames {script.n_frames}",
        f"size {script.width_px} {script.height_px}",
        "bg {},{},{}".format(*script.background),
        f"seed {script.rng_seed}",
    ]
    if script.jitter_px > 0:
        lines.append(f"jitter {script.jitter_px:g}")
    for actor in script.actors:
        lines.append("actor {} radius {:g} shade {},{},{}".format(
            actor.actor_id, actor.head_radius_px, *actor.head_shade))
        for wp in actor.waypoints:
            lines.append(f"wp {wp.frame} {wp.x:g} {wp.y:g}")
    return "\n".join(lines) + "\n"
