# Models for procedural scene generation
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SceneObject(BaseModel):
    """
    Camera-facing textured rectangle moving at constant velocity.
    Coordinates are camera-frame meters: X right, Y down, Z forward.
    """
    size: Tuple[float, float] = Field(description="width, height in meters")
    position: Tuple[float, float, float] = Field(description="initial center in meters")
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    albedo: float = Field(default=0.8, ge=0.0, le=1.0)
    texture_cell: float = Field(default=0.5, gt=0, description="checker cell size in meters")
    texture_contrast: float = Field(default=0.2, ge=0.0, le=1.0)
    off_screen: bool = False

    @field_validator("size")
    @classmethod
    def _positive_size(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] <= 0 or value[1] <= 0:
            raise ValueError("object size must be positive")
        return value


class SceneSpec(BaseModel):
    """Everything needed to render a deterministic grayscale sequence"""
    seed: int = 0
    width: int = Field(default=320, gt=0, le=65535)
    height: int = Field(default=240, gt=0, le=65535)
    frame_rate: float = Field(default=20.0, gt=0)
    duration: float = Field(default=1.0, ge=0, description="seconds")
    fov_deg: float = Field(default=90.0, gt=0, lt=180)
    objects: List[SceneObject] = []
    background_level: float = Field(default=100.0, ge=0, le=255)
    background_texture: float = Field(default=0.0, ge=0, le=64, description="amplitude of static seeded texture")

    @property
    def frame_count(self) -> int:
        return int(self.duration * self.frame_rate + 0.5)


class CameraModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    f: float = Field(gt=0)
    cx: float
    cy: float
