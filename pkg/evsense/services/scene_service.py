# Procedural scene generator: pinhole projection of textured moving objects
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from evsense.exceptions import InvalidParameterError
from evsense.models.dataset_models import VEHICLE_CLASS_ID, BBox, LabelRecord
from evsense.models.scene_models import CameraModel, SceneObject, SceneSpec
from evsense.models.sensor_models import NS_PER_S, FrameSequence

logger = logging.getLogger(__name__)

NEAR_PLANE_M = 0.1


def focal_from_fov(width: int, fov_deg: float) -> float:
    """Focal length in pixels for a horizontal field of view"""
    if not (0.0 < fov_deg < 180.0) or not math.isfinite(fov_deg):
        raise InvalidParameterError(f"field of view must lie in (0, 180) degrees, got {fov_deg}")
    if width <= 0:
        raise InvalidParameterError(f"width must be positive, got {width}")
    return (width / 2.0) / math.tan(fov_deg * math.pi / 360.0)


def camera_for(width: int, height: int, fov_deg: float) -> CameraModel:
    return CameraModel(f=focal_from_fov(width, fov_deg), cx=width / 2.0, cy=height / 2.0)


def project_point(point: Sequence[float], cam: CameraModel) -> Optional[Tuple[float, float]]:
    """Pixel position of a camera-frame point, or None when it lies behind the camera"""
    x, y, z = point
    if z <= 0:
        return None
    return (cam.cx + cam.f * x / z, cam.cy + cam.f * y / z)


def _covered_range(lo: float, hi: float, limit: int) -> Tuple[int, int]:
    """Pixel indices whose centers fall in [lo, hi), clipped to [0, limit)"""
    first = max(0, math.ceil(lo - 0.5))
    stop = min(limit, math.ceil(hi - 0.5))
    return first, stop


class SceneService:
    """
    Renders SceneSpecs into grayscale FrameSequences with tight ground-truth boxes.
    Objects are flat-shaded checker-textured rectangles facing the camera; nearer
    objects overwrite farther ones, so boxes are tight to the visible pixels.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))

    def generate_sequence(self, spec: SceneSpec, fov_deg: Optional[float] = None) -> Tuple[FrameSequence, List[LabelRecord]]:
        fov = spec.fov_deg if fov_deg is None else fov_deg
        n_frames = spec.frame_count
        if n_frames < 1:
            raise InvalidParameterError(
                f"scene duration {spec.duration}s at {spec.frame_rate}Hz implies zero frames"
            )

        cam = camera_for(spec.width, spec.height, fov)
        self._check_frustum(spec, cam)

        rng = np.random.default_rng(spec.seed)
        background = spec.background_level + rng.uniform(
            -spec.background_texture, spec.background_texture, size=(spec.height, spec.width)
        )
        # Checker phase of each object, as a fraction of one light+dark cell pair
        phases = rng.uniform(0.0, 1.0, size=(len(spec.objects), 2))

        timestamps = np.array(
            [int(round(k * NS_PER_S / spec.frame_rate)) for k in range(n_frames)], dtype=np.uint64
        )

        def render(k: int):
            return self._render_frame(spec, cam, background, phases, int(timestamps[k]))

        if self.workers > 1 and n_frames > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                rendered = list(pool.map(render, range(n_frames)))
        else:
            rendered = [render(k) for k in range(n_frames)]

        frames = np.stack([image for image, _ in rendered])
        labels = [
            LabelRecord(frame_index=k, t_ns=int(timestamps[k]), boxes=boxes)
            for k, (_, boxes) in enumerate(rendered)
        ]
        seq = FrameSequence(
            width=spec.width,
            height=spec.height,
            frame_rate=spec.frame_rate,
            fov_deg=fov,
            timestamps=timestamps,
            frames=frames,
        )
        logger.info(f"Rendered scene seed={spec.seed}: {n_frames} frames, {len(spec.objects)} objects, "
                    f"F_v={fov}deg, {sum(len(l.boxes) for l in labels)} boxes")
        return seq, labels

    def _check_frustum(self, spec: SceneSpec, cam: CameraModel) -> None:
        for track_id, obj in enumerate(spec.objects):
            if obj.off_screen:
                continue
            if self._object_rect(obj, obj.position, cam, spec.width, spec.height) is None:
                logger.warning(f"Object {track_id} starts outside the viewing frustum and is not marked off-screen")

    @staticmethod
    def _object_rect(obj: SceneObject, center: Sequence[float], cam: CameraModel, width: int, height: int):
        x, y, z = center
        if z <= NEAR_PLANE_M:
            return None
        half_w, half_h = obj.size[0] / 2.0, obj.size[1] / 2.0
        top_left = project_point((x - half_w, y - half_h, z), cam)
        bottom_right = project_point((x + half_w, y + half_h, z), cam)
        c0, c1 = _covered_range(top_left[0], bottom_right[0], width)
        r0, r1 = _covered_range(top_left[1], bottom_right[1], height)
        if c1 <= c0 or r1 <= r0:
            return None
        return r0, r1, c0, c1

    def _render_frame(self, spec: SceneSpec, cam: CameraModel, background: np.ndarray,
                      phases: np.ndarray, t_ns: int):
        t_s = t_ns / NS_PER_S
        image = background.copy()
        owner = np.full((spec.height, spec.width), -1, dtype=np.int32)

        placed = []
        for track_id, obj in enumerate(spec.objects):
            center = tuple(p + v * t_s for p, v in zip(obj.position, obj.velocity))
            placed.append((center[2], track_id, obj, center))

        # Painter's order: farthest first, nearer objects overwrite
        for depth, track_id, obj, center in sorted(placed, key=lambda item: (-item[0], item[1])):
            rect = self._object_rect(obj, center, cam, spec.width, spec.height)
            if rect is None:
                continue
            r0, r1, c0, c1 = rect
            image[r0:r1, c0:c1] = self._texture(obj, center, cam, phases[track_id], r0, r1, c0, c1)
            owner[r0:r1, c0:c1] = track_id

        boxes = []
        for _, track_id, obj, center in placed:
            rect = self._object_rect(obj, center, cam, spec.width, spec.height)
            if rect is None:
                continue
            r0, r1, c0, c1 = rect
            mask = owner[r0:r1, c0:c1] == track_id
            if not mask.any():
                continue  # fully occluded
            rows = np.flatnonzero(mask.any(axis=1))
            cols = np.flatnonzero(mask.any(axis=0))
            boxes.append(BBox(
                x=float(c0 + cols[0]),
                y=float(r0 + rows[0]),
                w=float(cols[-1] - cols[0] + 1),
                h=float(rows[-1] - rows[0] + 1),
                class_id=VEHICLE_CLASS_ID,
                track_id=track_id,
            ))

        frame = np.clip(np.rint(image), 0, 255).astype(np.uint8)
        return frame, boxes

    @staticmethod
    def _texture(obj: SceneObject, center, cam: CameraModel, phase: np.ndarray,
                 r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        x, y, z = center
        # Back-project pixel centers onto the object plane, measured from its top-left corner
        shift = 2.0 * obj.texture_cell * np.asarray(phase, dtype=np.float64)
        u = (np.arange(c0, c1) + 0.5 - cam.cx) * z / cam.f - (x - obj.size[0] / 2.0) + shift[0]
        v = (np.arange(r0, r1) + 0.5 - cam.cy) * z / cam.f - (y - obj.size[1] / 2.0) + shift[1]
        iu = np.floor(u / obj.texture_cell).astype(np.int64)
        iv = np.floor(v / obj.texture_cell).astype(np.int64)
        checker = (iv[:, None] + iu[None, :]) % 2
        return 255.0 * obj.albedo * (1.0 - obj.texture_contrast * checker)

    def random_spec(self, seed: int, width: int = 320, height: int = 240, n_frames: int = 20,
                    frame_rate: float = 20.0, fov_deg: float = 90.0,
                    max_objects: int = 3) -> SceneSpec:
        """Seeded random traffic-like scene with every object starting inside the frustum"""
        rng = np.random.default_rng(seed)
        tan_half = math.tan(fov_deg * math.pi / 360.0)
        objects = []
        for _ in range(int(rng.integers(1, max_objects + 1))):
            z = float(rng.uniform(6.0, 20.0))
            x = float(rng.uniform(-0.5, 0.5) * z * tan_half)
            direction = 1.0 if rng.random() < 0.5 else -1.0
            objects.append(SceneObject(
                size=(float(rng.uniform(1.8, 4.5)), float(rng.uniform(1.2, 2.4))),
                position=(x, float(rng.uniform(-0.5, 1.0)), z),
                velocity=(direction * float(rng.uniform(3.0, 12.0)), 0.0, float(rng.uniform(-1.0, 1.0))),
                albedo=float(rng.uniform(0.05, 0.95)),
                texture_cell=float(rng.uniform(0.3, 0.8)),
                texture_contrast=float(rng.uniform(0.1, 0.4)),
            ))
        return SceneSpec(
            seed=seed,
            width=width,
            height=height,
            frame_rate=frame_rate,
            duration=n_frames / frame_rate,
            fov_deg=fov_deg,
            objects=objects,
            background_level=float(rng.uniform(60.0, 160.0)),
            background_texture=6.0,
        )


# Global service instance
scene_service = SceneService()


def generate_sequence(spec: SceneSpec) -> Tuple[FrameSequence, List[LabelRecord]]:
    return scene_service.generate_sequence(spec)
