"""Overhead pedestrian tracking: dark-pixel head detection, metric
trajectories and kinematics, synthetic benchmark scenarios."""

__version__ = "0.1.0"

from .calibration import SceneCalibration, displacement_to_meters, meters_per_pixel
from .detection import (
    BoundingBox,
    Candidate,
    DetectionParams,
    PRESETS,
    center_of_mass,
    count_black_pixels,
    get_preset,
    is_black_pixel,
    refine_candidate,
    scan_frame,
)
from .frame_io import Frame, FrameSequence, decode_frame, encode_frame, load_sequence
from .kinematics import (
    KinematicsSeries,
    acceleration_series,
    compile_series,
    step_distance,
    velocity_series,
)
from .synth import (
    ActorPath,
    ScenarioScript,
    builtin_scenarios,
    get_scenario,
    ground_truth,
    render_scenario,
)
from .tracking import Track, TrackerState, is_out_of_scene, run, step

__all__ = [
    "__version__",
    "SceneCalibration", "displacement_to_meters", "meters_per_pixel",
    "BoundingBox", "Candidate", "DetectionParams", "PRESETS",
    "center_of_mass", "count_black_pixels", "get_preset", "is_black_pixel",
    "refine_candidate", "scan_frame",
    "Frame", "FrameSequence", "decode_frame", "encode_frame", "load_sequence",
    "KinematicsSeries", "acceleration_series", "compile_series",
    "step_distance", "velocity_series",
    "ActorPath", "ScenarioScript", "builtin_scenarios", "get_scenario",
    "ground_truth", "render_scenario",
    "Track", "TrackerState", "is_out_of_scene", "run", "step",
]
