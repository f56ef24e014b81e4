"""End-to-end runs: synthesize scenario frames, track a sequence, verify
against ground truth. This is the layer both the service endpoints and the
CLI drive; it owns all file placement inside the output directory.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import output as out
from .config import RunConfig, resolve_calibration, resolve_detection_params
from .calibration import SceneCalibration
from .detection import DetectionParams
from .errors import DataError, UsageError
from .evaluate import VerifyReport, evaluate, load_truth_csv, write_truth_csv
from .frame_io import FrameSequence, encode_frame, load_sequence
from .kinematics import KinematicsSeries, compile_series
from .synth import (
    ScenarioScript,
    get_scenario,
    ground_truth,
    parse_script,
    render_scenario,
    scenario_names,
)
from .tracking import Track, run as run_tracker

SEED_ENV_VAR = "PEDTRACK_SEED"


@dataclass
class SynthResult:
    scenario: str
    out_dir: str
    frames_written: int
    ground_truth_path: str
    width_px: int
    height_px: int
    fps: float
    seed: int


@dataclass
class TrackResult:
    run_name: str
    frames_processed: int
    tracks_created: int
    tracks_terminated: int
    wall_time_s: float
    output_dir: str | None
    outputs: list[str] = field(default_factory=list)
    # in-memory products for callers that keep going (verify, tests)
    tracks: list[Track] = field(default_factory=list)
    series: list[KinematicsSeries] = field(default_factory=list)
    calibration: SceneCalibration | None = None
    params: DetectionParams | None = None


@dataclass
class VerifyResult:
    report: VerifyReport
    report_path: str
    track: TrackResult


def _load_script(scenario_or_script: str) -> ScenarioScript:
    """Builtin scenario name, or a path to a script file."""
    try:
        return get_scenario(scenario_or_script)
    except KeyError:
        pass
    path = Path(scenario_or_script)
    if not path.is_file():
        raise UsageError(
            f"{scenario_or_script!r} is neither a builtin scenario "
            f"({', '.join(scenario_names())}) nor a script file"
        )
    return parse_script(path.read_text(), name=path.stem)


def _apply_seed(script: ScenarioScript, seed: int | None) -> ScenarioScript:
    """Explicit seed wins, then the environment override, then the script."""
    if seed is None and os.environ.get(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer: {exc}") from exc
    if seed is not None:
        script.rng_seed = seed
    return script


def run_synth(scenario_or_script: str, out_dir: str | Path,
              seed: int | None = None) -> SynthResult:
    """Render a scenario to numbered PPM frames plus ground_truth.csv."""
    script = _apply_seed(_load_script(scenario_or_script), seed)
    out_path = Path(out_dir)
    try:
        out_path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out_path}: {exc}") from exc

    sequence = render_scenario(script)
    for frame in sequence:
        (out_path / f"{script.name}_{frame.index:05d}.ppm").write_bytes(
            encode_frame(frame))
    truth_path = write_truth_csv(ground_truth(script), out_path / "ground_truth.csv")
    return SynthResult(
        scenario=script.name,
        out_dir=str(out_path),
        frames_written=len(sequence),
        ground_truth_path=str(truth_path),
        width_px=script.width_px,
        height_px=script.height_px,
        fps=script.fps,
        seed=script.rng_seed,
    )


def _resolve_sequence(cfg: RunConfig) -> tuple[FrameSequence, ScenarioScript | None]:
    if cfg.frames_dir:
        return load_sequence(cfg.frames_dir, fps=cfg.fps), None
    source = cfg.scenario or cfg.script
    script = _apply_seed(_load_script(source), cfg.seed)
    return render_scenario(script), script


def run_track(cfg: RunConfig) -> TrackResult:
    """Load or render frames, track, derive kinematics, emit toggled outputs."""
    started = time.perf_counter()
    sequence, script = _resolve_sequence(cfg)
    if len(sequence) == 0:
        raise DataError("no frames to process")

    default_scene = None
    default_preset = None
    if script is not None:
        from .calibration import CORRIDOR
        default_scene = dict(CORRIDOR)
        default_preset = script.preset
    cal = resolve_calibration(cfg, sequence.width_px, sequence.height_px,
                              default_scene=default_scene)
    params = resolve_detection_params(cfg, default_preset=default_preset)

    tracks = run_tracker(sequence, params)
    series = [compile_series(t, cal) for t in tracks]

    outputs: list[str] = []
    if cfg.output_dir is None and (cfg.annotate or cfg.csv or cfg.charts):
        raise UsageError("output_dir is required when any output is enabled")
    if cfg.output_dir is not None:
        out_dir = Path(cfg.output_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {out_dir}: {exc}") from exc
        outputs = _write_outputs(cfg, sequence, tracks, series, cal, out_dir)

    return TrackResult(
        run_name=cfg.run_name,
        frames_processed=len(sequence),
        tracks_created=len(tracks),
        tracks_terminated=sum(1 for t in tracks if not t.active),
        wall_time_s=time.perf_counter() - started,
        output_dir=cfg.output_dir,
        outputs=outputs,
        tracks=tracks,
        series=series,
        calibration=cal,
        params=params,
    )


def _write_outputs(cfg: RunConfig, sequence: FrameSequence, tracks: list[Track],
                   series: list[KinematicsSeries], cal: SceneCalibration,
                   out_dir: Path) -> list[str]:
    written: list[str] = []
    name = cfg.run_name
    colors = out.trajectory_colors(tracks)

    if cfg.csv:
        path = out.export_csv(series, tracks, cal, out_dir / f"{name}_kinematics.csv")
        written.append(path.name)

    if cfg.charts and series:
        rl_offset = (cfg.rl_distance_offset_m if cfg.rl_distance_offset_m is not None
                     else cal.scene_width_m)
        offsets = out.distance_offsets(tracks, rl_offset)
        for quantity in ("distance", "velocity", "acceleration"):
            try:
                svg = out.render_chart(series, quantity, colors=colors,
                                       offsets=offsets if quantity == "distance" else None,
                                       smoothing=cfg.smoothing_window)
            except ValueError:
                continue  # no track has enough samples for this quantity
            svg_path = out_dir / f"{name}_{quantity}.svg"
            svg_path.write_text(svg)
            written.append(svg_path.name)
            dat_path = out_dir / f"{name}_{quantity}.dat"
            dat_path.write_text(out.chart_sidecar(
                series, quantity,
                offsets=offsets if quantity == "distance" else None,
                smoothing=cfg.smoothing_window))
            written.append(dat_path.name)

    if cfg.annotate:
        for frame in sequence:
            annotated = out.annotate_frame(frame, tracks, colors=colors)
            path = out_dir / f"{name}_annotated_{frame.index:05d}.ppm"
            path.write_bytes(encode_frame(annotated))
            written.append(path.name)
    return sorted(written)


def run_verify(cfg: RunConfig, truth_path: str | Path) -> VerifyResult:
    """Track per the config, then compare against the ground-truth CSV."""
    track_result = run_track(cfg)
    truth = load_truth_csv(truth_path)
    report = evaluate(truth, track_result.tracks, track_result.series,
                      track_result.calibration, bounds=cfg.bounds)
    if cfg.output_dir is None:
        raise UsageError("output_dir is required to write the verify report")
    report_path = Path(cfg.output_dir) / f"{cfg.run_name}_verify.json"
    report_path.write_text(report.to_json())
    return VerifyResult(report=report, report_path=str(report_path),
                        track=track_result)
