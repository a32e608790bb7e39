# Models for baseline detector output and prediction documents
from typing import List

from pydantic import BaseModel, ConfigDict, Field

from evsense.models.dataset_models import BBox


class Detection(BaseModel):
    model_config = ConfigDict(frozen=True)

    box: BBox
    score: float = Field(ge=0.0, le=1.0)


class DetectorParams(BaseModel):
    """Configuration for the event-density blob detector"""
    density_threshold: int = Field(default=1, ge=1)  # summed count per pixel
    min_area: int = Field(default=64, ge=1)  # pixels^2, per merged group
    dilation_radius: int = Field(default=2, ge=0)  # pixels
    merge_gap_ratio: float = Field(default=2.5, ge=0)  # 0 keeps components apart


class PredictedBox(BaseModel):
    x: float
    y: float
    w: float = Field(gt=0)
    h: float = Field(gt=0)
    score: float = Field(ge=0.0, le=1.0)


class PredictionRecord(BaseModel):
    """One line of a predictions document"""
    sequence_id: str
    frame_index: int = Field(ge=0)
    boxes: List[PredictedBox] = []

    def detections(self) -> List[Detection]:
        return [
            Detection(box=BBox(x=b.x, y=b.y, w=b.w, h=b.h), score=b.score)
            for b in self.boxes
        ]

    @classmethod
    def from_detections(cls, sequence_id: str, frame_index: int, detections: List[Detection]) -> "PredictionRecord":
        return cls(
            sequence_id=sequence_id,
            frame_index=frame_index,
            boxes=[
                PredictedBox(x=d.box.x, y=d.box.y, w=d.box.w, h=d.box.h, score=d.score)
                for d in detections
            ],
        )
