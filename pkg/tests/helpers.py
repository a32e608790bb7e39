from pathlib import Path
from typing import Sequence

import numpy as np

from evsense.cli.main import main
from evsense.models.scene_models import SceneObject, SceneSpec
from evsense.models.sensor_models import NS_PER_MS, FrameSequence, SensorConfig


def frames_from(images: Sequence[np.ndarray], dt_ms: int = 50, fov_deg: float = 90.0) -> FrameSequence:
    """FrameSequence from a list of uint8 images sampled every dt_ms"""
    stack = np.stack([np.asarray(image, dtype=np.uint8) for image in images])
    return FrameSequence(
        width=stack.shape[2],
        height=stack.shape[1],
        frame_rate=1000.0 / dt_ms,
        fov_deg=fov_deg,
        timestamps=np.arange(len(stack), dtype=np.uint64) * dt_ms * NS_PER_MS,
        frames=stack,
    )


def sensor(th_p: float = 0.5, th_n: float = 0.5, refractory_ms: float = 0.01, fov_deg: float = 90.0) -> SensorConfig:
    return SensorConfig(th_p=th_p, th_n=th_n, refractory_ms=refractory_ms, fov_deg=fov_deg)


def moving_car_spec(seed: int = 0, n_frames: int = 6, objects: bool = True) -> SceneSpec:
    """160x120 scene with one large textured box crossing the view"""
    return SceneSpec(
        seed=seed,
        width=160,
        height=120,
        frame_rate=20.0,
        duration=n_frames / 20.0,
        fov_deg=90.0,
        background_level=100.0,
        background_texture=4.0,
        objects=[
            SceneObject(size=(2.0, 1.5), position=(-0.4, 0.0, 3.0), velocity=(2.0, 0.0, 0.0),
                        albedo=0.8, texture_cell=0.4, texture_contrast=0.3),
        ] if objects else [],
    )


def write_scene(directory: Path, spec: SceneSpec) -> Path:
    """Render a SceneSpec to a scene directory through the CLI"""
    directory.mkdir(parents=True, exist_ok=True)
    spec_path = directory.parent / f"{directory.name}_spec.json"
    spec_path.write_text(spec.model_dump_json(), encoding="utf-8")
    assert main(["gen-scene", "--spec", str(spec_path), "--out", str(directory)]) == 0
    return directory
