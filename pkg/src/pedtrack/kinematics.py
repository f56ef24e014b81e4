"""Metric kinematics of tracked centers of mass.

Distances are per-frame L2 steps in meters, velocity is the unsigned
ratio step/dt, acceleration the signed velocity difference over dt.
Velocity and acceleration samples are timestamped at the later frame of
their pair; no smoothing is applied unless explicitly requested.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import SceneCalibration, displacement_to_meters
from .tracking import Track


@dataclass(frozen=True)
class KinematicSample:
    """One per-frame record; velocity/acceleration are None until defined."""

    frame: int
    t_s: float
    step_distance_m: float
    cumulative_distance_m: float
    velocity_mps: float | None
    acceleration_mps2: float | None


@dataclass(frozen=True)
class KinematicsSeries:
    track_id: int
    samples: list[KinematicSample]

    @property
    def velocities(self) -> list[float]:
        return [s.velocity_mps for s in self.samples if s.velocity_mps is not None]

    @property
    def accelerations(self) -> list[float]:
        return [s.acceleration_mps2 for s in self.samples
                if s.acceleration_mps2 is not None]

    @property
    def cumulative_m(self) -> float:
        return self.samples[-1].cumulative_distance_m if self.samples else 0.0


def step_distance(com_prev: tuple[float, float], com_curr: tuple[float, float],
                  cal: SceneCalibration) -> float:
    """Metric L2 distance between consecutive centers of mass."""
    return displacement_to_meters(cal, com_curr[0] - com_prev[0],
                                  com_curr[1] - com_prev[1])


def velocity_series(distances: list[float], dt: float) -> list[float]:
    """Per-step speeds d_i / dt; one entry per inter-frame step."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return [d / dt for d in distances]


def acceleration_series(velocities: list[float], dt: float) -> list[float]:
    """Signed velocity differences over dt; one shorter than the input."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return [(velocities[i + 1] - velocities[i]) / dt
            for i in range(len(velocities) - 1)]


def compile_series(track: Track, cal: SceneCalibration) -> KinematicsSeries:
    """Full kinematics of one track: step and cumulative distance, v, a."""
    if not track.com_history:
        raise ValueError(f"track {track.id} has an empty history")
    dt = 1.0 / cal.fps
    points = track.com_history
    steps = [0.0] + [
        step_distance((points[i - 1].x, points[i - 1].y), (points[i].x, points[i].y), cal)
        for i in range(1, len(points))
    ]
    velocities = velocity_series(steps[1:], dt)
    accelerations = acceleration_series(velocities, dt)

    samples = []
    cumulative = 0.0
    for i, point in enumerate(points):
        cumulative += steps[i]
        samples.append(KinematicSample(
            frame=point.frame,
            t_s=point.frame / cal.fps,
            step_distance_m=steps[i],
            cumulative_distance_m=cumulative,
            velocity_mps=velocities[i - 1] if i >= 1 else None,
            acceleration_mps2=accelerations[i - 2] if i >= 2 else None,
        ))
    return KinematicsSeries(track_id=track.id, samples=samples)


def moving_average(values: list[float], window: int) -> list[float]:
    """Centered moving average with an odd window; edges shrink the window."""
    if window <= 0:
        return list(values)
    if window % 2 == 0:
        raise ValueError(f"smoothing window must be odd, got {window}")
    half = window // 2
    out = []
    for i in range(len(values)):
        lo = max(i - half, 0)
        hi = min(i + half + 1, len(values))
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out
