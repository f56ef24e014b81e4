"""HTTP service wrapping the pipeline.

Endpoints take filesystem paths (client and server share a filesystem in
the intended deployment) or inline config text, run the batch pipeline,
and return structured summaries. The CLI drives these same handlers
in-process when no server is configured.
"""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .config import build_config, load_config, parse_config_text
from .detection import PRESETS
from .errors import DataError, UsageError
from .pipeline import run_synth, run_track, run_verify
from .synth import get_scenario, scenario_names


class SynthRequest(BaseModel):
    scenario: str = Field(description="builtin scenario name or script file path")
    out_dir: str
    seed: int | None = None


class SynthResponse(BaseModel):
    scenario: str
    out_dir: str
    frames_written: int
    ground_truth_path: str
    width_px: int
    height_px: int
    fps: float
    seed: int


class TrackRequest(BaseModel):
    config_path: str | None = None
    config_text: str | None = None
    preset: str | None = None
    out_dir: str | None = None

    @model_validator(mode="after")
    def _one_config_source(self):
        if (self.config_path is None) == (self.config_text is None):
            raise ValueError("give exactly one of config_path or config_text")
        return self

    def overrides(self) -> dict[str, str]:
        overrides = {}
        if self.preset:
            overrides["preset"] = self.preset
        if self.out_dir:
            overrides["output_dir"] = self.out_dir
        return overrides


class TrackResponse(BaseModel):
    run_name: str
    frames_processed: int
    tracks_created: int
    tracks_terminated: int
    wall_time_s: float
    output_dir: str | None
    outputs: list[str]


class VerifyRequest(TrackRequest):
    truth_path: str


class ActorReport(BaseModel):
    actor_id: int
    track_id: int | None
    matched: bool
    gt_frames: int
    overlap_frames: int
    coverage: float
    mean_dist_px: float | None
    rmse_px: float | None
    mean_speed_mps: float
    gt_mean_speed_mps: float
    speed_error_pct: float | None
    id_switches: int


class TrackReport(BaseModel):
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


class VerifyResponse(BaseModel):
    passed: bool
    n_actors: int
    n_tracks: int
    failures: list[str]
    actors: list[ActorReport]
    tracks: list[TrackReport]
    report_path: str
    track_run: TrackResponse


class ScenarioInfo(BaseModel):
    name: str
    full_name: str
    actors: int
    n_frames: int
    preset: str


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, UsageError):
        return HTTPException(status_code=400,
                             detail={"kind": "usage", "message": str(exc)})
    if isinstance(exc, DataError):
        return HTTPException(status_code=422,
                             detail={"kind": "data", "message": str(exc)})
    raise exc


def _finite(value: float) -> float | None:
    return value if value == value and abs(value) != float("inf") else None


app = FastAPI(title="pedtrack", version=__version__,
              description="Overhead pedestrian tracking pipeline")


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/scenarios", response_model=list[ScenarioInfo])
def scenarios() -> list[ScenarioInfo]:
    infos = []
    for name in scenario_names():
        script = get_scenario(name)
        infos.append(ScenarioInfo(name=name, full_name=script.name,
                                  actors=len(script.actors),
                                  n_frames=script.n_frames, preset=script.preset))
    return infos


@app.get("/presets")
def presets() -> dict:
    return {name: asdict(params) for name, params in sorted(PRESETS.items())}


@app.post("/synth", response_model=SynthResponse)
def synth(req: SynthRequest) -> SynthResponse:
    try:
        result = run_synth(req.scenario, req.out_dir, seed=req.seed)
    except (UsageError, DataError) as exc:
        raise _http_error(exc)
    return SynthResponse(**asdict(result))


def _load_request_config(req: TrackRequest):
    if req.config_path is not None:
        return load_config(req.config_path, overrides=req.overrides())
    return build_config(parse_config_text(req.config_text),
                        overrides=req.overrides())


@app.post("/track", response_model=TrackResponse)
def track(req: TrackRequest) -> TrackResponse:
    try:
        result = run_track(_load_request_config(req))
    except (UsageError, DataError) as exc:
        raise _http_error(exc)
    return TrackResponse(
        run_name=result.run_name,
        frames_processed=result.frames_processed,
        tracks_created=result.tracks_created,
        tracks_terminated=result.tracks_terminated,
        wall_time_s=result.wall_time_s,
        output_dir=result.output_dir,
        outputs=result.outputs,
    )


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    try:
        result = run_verify(_load_request_config(req), req.truth_path)
    except (UsageError, DataError) as exc:
        raise _http_error(exc)
    report = result.report
    return VerifyResponse(
        passed=report.passed,
        n_actors=report.n_actors,
        n_tracks=report.n_tracks,
        failures=report.failures,
        actors=[ActorReport(
            actor_id=a.actor_id, track_id=a.track_id, matched=a.matched,
            gt_frames=a.gt_frames, overlap_frames=a.overlap_frames,
            coverage=a.coverage, mean_dist_px=_finite(a.mean_dist_px),
            rmse_px=_finite(a.rmse_px), mean_speed_mps=a.mean_speed_mps,
            gt_mean_speed_mps=a.gt_mean_speed_mps,
            speed_error_pct=_finite(a.speed_error_pct),
            id_switches=a.id_switches,
        ) for a in report.actors],
        tracks=[TrackReport(**asdict(t)) for t in report.tracks],
        report_path=result.report_path,
        track_run=TrackResponse(
            run_name=result.track.run_name,
            frames_processed=result.track.frames_processed,
            tracks_created=result.track.tracks_created,
            tracks_terminated=result.track.tracks_terminated,
            wall_time_s=result.track.wall_time_s,
            output_dir=result.track.output_dir,
            outputs=result.track.outputs,
        ),
    )
