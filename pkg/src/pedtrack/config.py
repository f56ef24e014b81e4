"""Run configuration: a flat ``key = value`` text file plus flag overrides.

Exactly one input source (frames_dir, scenario, or script) must be given.
Detection comes either from a named preset or from explicit threshold
keys, never both. Builtin scenarios supply their own tuned preset and
calibration defaults when those are omitted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .calibration import CORRIDOR, SceneCalibration
from .detection import PRESETS, DetectionParams, get_preset
from .errors import UsageError
from .evaluate import VerifyBounds

_DETECTION_KEYS = ("box_w", "box_h", "black_max", "min_black_count",
                   "vicinity_margin", "max_step", "overlap_margin")

_INT_KEYS = {"image_width_px", "image_height_px", "smoothing_window", "seed",
             "max_id_switches", *_DETECTION_KEYS, "scan_stride"}
_FLOAT_KEYS = {"scene_width_m", "scene_height_m", "mount_height_m", "fps",
               "rl_distance_offset_m", "match_threshold_px", "max_rmse_px",
               "min_coverage", "max_speed_error_pct"}
_BOOL_KEYS = {"annotate", "csv", "charts"}
_STR_KEYS = {"frames_dir", "scenario", "script", "preset", "output_dir", "run_name"}

_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass
class RunConfig:
    # input (exactly one)
    frames_dir: str | None = None
    scenario: str | None = None
    script: str | None = None
    # calibration
    scene_width_m: float | None = None
    scene_height_m: float | None = None
    image_width_px: int | None = None
    image_height_px: int | None = None
    mount_height_m: float = 3.5
    fps: float = 30.0
    # detection
    preset: str | None = None
    detection: dict[str, int] | None = None
    scan_stride: int | None = None
    # output
    output_dir: str | None = None
    run_name: str = "run"
    annotate: bool = False
    csv: bool = True
    charts: bool = True
    smoothing_window: int = 0
    rl_distance_offset_m: float | None = None
    # verification bounds
    bounds: VerifyBounds = VerifyBounds()
    # synthetic seed override
    seed: int | None = None

    def input_kind(self) -> str:
        return "frames_dir" if self.frames_dir else (
            "scenario" if self.scenario else "script")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat key = value lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise UsageError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise UsageError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _convert(key: str, value: str, source: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise UsageError(f"{source}: key {key!r}: {exc}") from exc
    if key in _BOOL_KEYS:
        lowered = value.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise UsageError(f"{source}: key {key!r}: not a boolean: {value!r}")
    return value


def build_config(values: dict[str, str], source: str = "<config>",
                 overrides: dict[str, str] | None = None) -> RunConfig:
    """Typed config from raw key/value strings; overrides win over file keys."""
    merged = dict(values)
    for key, value in (overrides or {}).items():
        if key not in _ALL_KEYS:
            raise UsageError(f"unknown override key {key!r}")
        merged[key] = value

    typed = {k: _convert(k, v, source) for k, v in merged.items()}

    inputs = [k for k in ("frames_dir", "scenario", "script") if typed.get(k)]
    if len(inputs) != 1:
        raise UsageError(
            f"{source}: exactly one input source required "
            f"(frames_dir | scenario | script), got {inputs or 'none'}"
        )

    explicit = {k: typed[k] for k in _DETECTION_KEYS if k in typed}
    preset = typed.get("preset")
    if preset and explicit:
        raise UsageError(
            f"{source}: give either 'preset' or explicit detection keys, not both "
            f"(explicit: {sorted(explicit)})"
        )
    if explicit and len(explicit) != len(_DETECTION_KEYS):
        missing = sorted(set(_DETECTION_KEYS) - set(explicit))
        raise UsageError(f"{source}: incomplete detection block, missing {missing}")
    if preset:
        key = preset.lower()
        if key not in PRESETS and key not in {f"s{i}" for i in range(1, 5)}:
            raise UsageError(
                f"{source}: unknown preset {preset!r}; "
                f"valid: {', '.join(sorted(PRESETS))} (or s1..s4)"
            )

    cfg = RunConfig(
        frames_dir=typed.get("frames_dir"),
        scenario=typed.get("scenario"),
        script=typed.get("script"),
        scene_width_m=typed.get("scene_width_m"),
        scene_height_m=typed.get("scene_height_m"),
        image_width_px=typed.get("image_width_px"),
        image_height_px=typed.get("image_height_px"),
        mount_height_m=typed.get("mount_height_m", 3.5),
        fps=typed.get("fps", 30.0),
        preset=preset,
        detection=explicit or None,
        scan_stride=typed.get("scan_stride"),
        output_dir=typed.get("output_dir"),
        run_name=typed.get("run_name", "run"),
        annotate=typed.get("annotate", False),
        csv=typed.get("csv", True),
        charts=typed.get("charts", True),
        smoothing_window=typed.get("smoothing_window", 0),
        rl_distance_offset_m=typed.get("rl_distance_offset_m"),
        bounds=VerifyBounds(
            match_threshold_px=typed.get("match_threshold_px", 25.0),
            max_rmse_px=typed.get("max_rmse_px", 2.0),
            min_coverage=typed.get("min_coverage", 0.95),
            max_speed_error_pct=typed.get("max_speed_error_pct", 5.0),
            max_id_switches=typed.get("max_id_switches", 0),
        ),
        seed=typed.get("seed"),
    )
    if cfg.smoothing_window and cfg.smoothing_window % 2 == 0:
        raise UsageError(f"{source}: smoothing_window must be odd or 0")
    return cfg


def load_config(path: str | Path, overrides: dict[str, str] | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    return build_config(parse_config_text(path.read_text(), str(path)),
                        source=str(path), overrides=overrides)


def resolve_detection_params(cfg: RunConfig,
                             default_preset: str | None = None) -> DetectionParams:
    """Preset or explicit block; builtin scenarios supply default_preset."""
    if cfg.detection:
        return DetectionParams(**cfg.detection,
                               scan_stride=cfg.scan_stride or 10)
    name = cfg.preset or default_preset
    if name is None:
        raise UsageError("no detection preset or explicit detection block given")
    params = get_preset(name)
    if cfg.scan_stride:
        params = replace(params, scan_stride=cfg.scan_stride)
    return params


def resolve_calibration(cfg: RunConfig, frame_w: int, frame_h: int,
                        default_scene: dict | None = None) -> SceneCalibration:
    """Calibration from config keys, with scenario defaults where omitted.

    The configured image resolution must match the actual frames.
    """
    scene = default_scene or CORRIDOR
    width_m = cfg.scene_width_m if cfg.scene_width_m is not None else (
        scene["scene_width_m"] if default_scene is not None else None)
    height_m = cfg.scene_height_m if cfg.scene_height_m is not None else (
        scene["scene_height_m"] if default_scene is not None else None)
    if width_m is None or height_m is None:
        raise UsageError(
            "calibration requires scene_width_m and scene_height_m "
            "(builtin scenarios default to the corridor geometry)"
        )
    width_px = cfg.image_width_px if cfg.image_width_px is not None else frame_w
    height_px = cfg.image_height_px if cfg.image_height_px is not None else frame_h
    if (width_px, height_px) != (frame_w, frame_h):
        raise UsageError(
            f"configured resolution {width_px}x{height_px} does not match "
            f"the {frame_w}x{frame_h} frames"
        )
    return SceneCalibration(
        scene_width_m=width_m,
        scene_height_m=height_m,
        image_width_px=width_px,
        image_height_px=height_px,
        mount_height_m=cfg.mount_height_m,
        fps=cfg.fps,
    )
