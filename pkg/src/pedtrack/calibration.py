"""Pixel-to-meter conversion from the projected captured-area rectangle.

The overhead camera sees a known rectangle of floor (scene_width_m by
scene_height_m) projected onto the full image raster, so each axis gets
one uniform scale factor. Scales may differ per axis when the scene
aspect ratio does not match the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

CORRIDOR = dict(scene_width_m=2.0, scene_height_m=1.5, mount_height_m=3.5)
LOBBY = dict(scene_width_m=2.5, scene_height_m=1.8, mount_height_m=3.9)


@dataclass(frozen=True)
class SceneCalibration:
    """Captured-area geometry. mount_height_m is metadata only."""

    scene_width_m: float
    scene_height_m: float
    image_width_px: int
    image_height_px: int
    mount_height_m: float = 3.5
    fps: float = 30.0

    def __post_init__(self):
        for name in ("scene_width_m", "scene_height_m", "image_width_px",
                     "image_height_px", "mount_height_m", "fps"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def sx(self) -> float:
        """Meters per pixel along x."""
        return self.scene_width_m / self.image_width_px

    @property
    def sy(self) -> float:
        """Meters per pixel along y."""
        return self.scene_height_m / self.image_height_px


def meters_per_pixel(cal: SceneCalibration) -> tuple[float, float]:
    return cal.sx, cal.sy


def displacement_to_meters(cal: SceneCalibration, dx_px: float, dy_px: float) -> float:
    """Metric length of a pixel displacement: axis scales applied before the norm."""
    return math.hypot(dx_px * cal.sx, dy_px * cal.sy)
