"""Comparison of tracker output against scripted ground truth.

Each ground-truth actor is greedily assigned the unclaimed track with the
smallest mean per-frame distance over their overlapping frames; the report
carries per-actor accuracy (RMSE, coverage, speed error, id switches) and
per-track kinematic summaries, plus pass/fail against configurable bounds.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .calibration import SceneCalibration, displacement_to_meters
from .errors import DataError
from .kinematics import KinematicsSeries
from .tracking import Track

GroundTruth = dict[int, list[tuple[int, float, float]]]


@dataclass(frozen=True)
class VerifyBounds:
    match_threshold_px: float = 25.0
    max_rmse_px: float = 2.0
    min_coverage: float = 0.95
    max_speed_error_pct: float = 5.0
    max_id_switches: int = 0


@dataclass
class ActorMatch:
    actor_id: int
    track_id: int | None
    matched: bool
    gt_frames: int
    overlap_frames: int
    coverage: float
    mean_dist_px: float
    rmse_px: float
    mean_speed_mps: float
    gt_mean_speed_mps: float
    speed_error_pct: float
    id_switches: int


@dataclass
class TrackSummary:
    track_id: int
    first_frame: int
    last_frame: int
    n_frames: int
    cruise_speed_mps: float
    min_speed_mps: float
    max_speed_mps: float
    net_displacement_m: float
    cumulative_distance_m: float
    net_to_cumulative: float


@dataclass
class VerifyReport:
    n_actors: int
    n_tracks: int
    actors: list[ActorMatch]
    tracks: list[TrackSummary]
    bounds: VerifyBounds
    failures: list[str] = field(default_factory=list)
    passed: bool = True

    def to_json(self) -> str:
        def clean(obj):
            if isinstance(obj, float) and not math.isfinite(obj):
                return None
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, list):
                return [clean(v) for v in obj]
            return obj

        return json.dumps(clean(asdict(self)), indent=2, sort_keys=True) + "\n"


def write_truth_csv(truth: GroundTruth, path: str | Path) -> Path:
    path = Path(path)
    lines = ["actor_id,frame,x_px,y_px"]
    for actor_id in sorted(truth):
        for frame, x, y in truth[actor_id]:
            lines.append(f"{actor_id},{frame},{format(x, '.10g')},{format(y, '.10g')}")
    path.write_text("\n".join(lines) + "\n")
    return path


def load_truth_csv(path: str | Path) -> GroundTruth:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"ground truth file not found: {path}")
    truth: GroundTruth = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["actor_id", "frame", "x_px", "y_px"]:
            raise DataError(f"{path}: unexpected ground truth header {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                actor_id, frame = int(row[0]), int(row[1])
                x, y = float(row[2]), float(row[3])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: bad row {row}: {exc}") from exc
            truth.setdefault(actor_id, []).append((frame, x, y))
    for rows in truth.values():
        rows.sort(key=lambda r: r[0])
    return truth


def _overlap_distances(rows: list[tuple[int, float, float]],
                       track: Track) -> list[tuple[int, float]]:
    """(frame, distance) for ground-truth frames the track also covers."""
    out = []
    for frame, x, y in rows:
        point = track.com_at(frame)
        if point is not None:
            out.append((frame, math.dist((x, y), (point.x, point.y))))
    return out


def _mean_speed_over(frames: set[int], positions: dict[int, tuple[float, float]],
                     cal: SceneCalibration) -> float:
    """Mean speed over consecutive frame pairs that both lie in `frames`."""
    steps = []
    for f in sorted(frames):
        if f + 1 in frames:
            ax, ay = positions[f]
            bx, by = positions[f + 1]
            steps.append(displacement_to_meters(cal, bx - ax, by - ay))
    if not steps:
        return 0.0
    return (sum(steps) / len(steps)) * cal.fps


def _id_switches(rows: list[tuple[int, float, float]], tracks: list[Track]) -> int:
    """Changes of the nearest track id across consecutive in-view frames."""
    switches = 0
    previous: int | None = None
    for frame, x, y in rows:
        nearest: int | None = None
        best = math.inf
        for track in tracks:
            point = track.com_at(frame)
            if point is None:
                continue
            d = math.dist((x, y), (point.x, point.y))
            if d < best:
                best, nearest = d, track.id
        if nearest is not None and previous is not None and nearest != previous:
            switches += 1
        if nearest is not None:
            previous = nearest
    return switches


def summarize_track(track: Track, series: KinematicsSeries,
                    cal: SceneCalibration) -> TrackSummary:
    velocities = series.velocities
    first, last = track.com_history[0], track.com_history[-1]
    net = displacement_to_meters(cal, last.x - first.x, last.y - first.y)
    cumulative = series.cumulative_m
    return TrackSummary(
        track_id=track.id,
        first_frame=track.first_frame,
        last_frame=track.last_frame,
        n_frames=len(track.com_history),
        cruise_speed_mps=statistics.median(velocities) if velocities else 0.0,
        min_speed_mps=min(velocities) if velocities else 0.0,
        max_speed_mps=max(velocities) if velocities else 0.0,
        net_displacement_m=net,
        cumulative_distance_m=cumulative,
        net_to_cumulative=net / cumulative if cumulative > 0 else 0.0,
    )


def match_actors(truth: GroundTruth, tracks: list[Track],
                 cal: SceneCalibration, bounds: VerifyBounds) -> list[ActorMatch]:
    """Greedy assignment in ascending actor order; a track matches once."""
    available = {t.id: t for t in tracks}
    matches = []
    for actor_id in sorted(truth):
        rows = truth[actor_id]
        best_track = None
        best_stats = None
        for track in sorted(available.values(), key=lambda t: t.id):
            pairs = _overlap_distances(rows, track)
            if not pairs:
                continue
            mean_dist = sum(d for _, d in pairs) / len(pairs)
            if mean_dist > bounds.match_threshold_px:
                continue
            if best_stats is None or mean_dist < best_stats[0]:
                best_track, best_stats = track, (mean_dist, pairs)
        if best_track is None:
            matches.append(ActorMatch(
                actor_id=actor_id, track_id=None, matched=False,
                gt_frames=len(rows), overlap_frames=0, coverage=0.0,
                mean_dist_px=math.inf, rmse_px=math.inf,
                mean_speed_mps=0.0, gt_mean_speed_mps=0.0,
                speed_error_pct=math.inf, id_switches=0))
            continue

        mean_dist, pairs = best_stats
        del available[best_track.id]
        overlap = {f for f, _ in pairs}
        rmse = math.sqrt(sum(d * d for _, d in pairs) / len(pairs))
        gt_positions = {f: (x, y) for f, x, y in rows}
        track_positions = {
            f: (p.x, p.y) for f in overlap if (p := best_track.com_at(f)) is not None
        }
        gt_speed = _mean_speed_over(overlap, gt_positions, cal)
        track_speed = _mean_speed_over(overlap, track_positions, cal)
        if gt_speed > 0:
            speed_err = abs(track_speed - gt_speed) / gt_speed * 100.0
        else:
            speed_err = 0.0 if track_speed == 0 else math.inf
        matches.append(ActorMatch(
            actor_id=actor_id,
            track_id=best_track.id,
            matched=True,
            gt_frames=len(rows),
            overlap_frames=len(pairs),
            coverage=len(pairs) / len(rows),
            mean_dist_px=mean_dist,
            rmse_px=rmse,
            mean_speed_mps=track_speed,
            gt_mean_speed_mps=gt_speed,
            speed_error_pct=speed_err,
            id_switches=_id_switches(rows, tracks),
        ))
    return matches


def evaluate(truth: GroundTruth, tracks: list[Track],
             series: list[KinematicsSeries], cal: SceneCalibration,
             bounds: VerifyBounds | None = None) -> VerifyReport:
    bounds = bounds or VerifyBounds()
    matches = match_actors(truth, tracks, cal, bounds)
    by_id = {s.track_id: s for s in series}
    summaries = [summarize_track(t, by_id[t.id], cal)
                 for t in sorted(tracks, key=lambda t: t.id)]

    failures = []
    for m in matches:
        tag = f"actor {m.actor_id}"
        if not m.matched:
            failures.append(f"{tag}: no track within "
                            f"{bounds.match_threshold_px} px")
            continue
        if m.rmse_px > bounds.max_rmse_px:
            failures.append(f"{tag}: rmse {m.rmse_px:.3f} px > {bounds.max_rmse_px}")
        if m.coverage < bounds.min_coverage:
            failures.append(f"{tag}: coverage {m.coverage:.3f} < {bounds.min_coverage}")
        if m.speed_error_pct > bounds.max_speed_error_pct:
            failures.append(f"{tag}: speed error {m.speed_error_pct:.2f}% > "
                            f"{bounds.max_speed_error_pct}%")
        if m.id_switches > bounds.max_id_switches:
            failures.append(f"{tag}: {m.id_switches} id switches > "
                            f"{bounds.max_id_switches}")
    return VerifyReport(
        n_actors=len(matches),
        n_tracks=len(tracks),
        actors=matches,
        tracks=summaries,
        bounds=bounds,
        failures=failures,
        passed=not failures,
    )
