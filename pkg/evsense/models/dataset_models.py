# Models for ground truth labels, dataset manifests and configuration partitions
import math
from enum import Enum
from typing import Dict, FrozenSet, List

from pydantic import BaseModel, ConfigDict, Field

VEHICLE_CLASS_ID = 0


class BBox(BaseModel):
    """Axis-aligned box, top-left origin, pixel units"""
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    w: float = Field(gt=0)
    h: float = Field(gt=0)
    class_id: int = VEHICLE_CLASS_ID
    track_id: int = -1

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return math.sqrt(self.w * self.w + self.h * self.h)

    @property
    def effective_side(self) -> float:
        return math.sqrt(self.w * self.h)


class LabelRecord(BaseModel):
    """One labelled frame of a sequence (one line of a labels document)"""
    frame_index: int = Field(ge=0)
    t_ns: int = Field(ge=0)
    boxes: List[BBox] = []


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class SequenceEntry(BaseModel):
    sequence_id: str
    town_id: str
    config_id: str
    frames_path: str
    events_path: str
    labels_path: str
    route_id: str = ""


class DatasetManifest(BaseModel):
    """Sequences with their town, configuration and split assignments. Paths are relative to the manifest."""
    sequences: List[SequenceEntry] = []
    splits: Dict[str, Split] = {}

    def split_of(self, sequence: SequenceEntry) -> Split:
        return self.splits[sequence.town_id]


class Partition(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    config_ids: FrozenSet[str]
    description: str = ""

    def ordered_ids(self) -> List[str]:
        """Configuration ids in registry order"""
        from evsense.services.config_registry import config_registry
        return [cid for cid in config_registry.ids() if cid in self.config_ids]
