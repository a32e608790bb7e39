# Models for the per-configuration sweep pipeline
from typing import Any, Dict, List, Optional

from pydantic import BaseModel
from typing_extensions import TypedDict

from evsense.models.dataset_models import LabelRecord
from evsense.models.detection_models import PredictionRecord
from evsense.models.evaluation_models import MetricId
from evsense.models.run_config import RunConfig
from evsense.models.sensor_models import EventStream, FrameSequence, SensorConfig


class SweepSequence(BaseModel):
    """One input sequence of a sweep: rendered frames plus labels, optionally with the scene that produced them"""
    sequence_id: str
    frames_path: str
    labels_path: str
    scene_spec_path: Optional[str] = None


class SweepState(TypedDict, total=False):
    """
    State object for one configuration's transduce -> represent -> detect -> evaluate run
    Compatible with LangGraph's state handling
    """
    # Input parameters
    sensor_config: SensorConfig
    test_set: str
    sequences: List[SweepSequence]
    run_config: RunConfig
    out_dir: str  # <out>/<config_id>

    # Pipeline data
    frame_sequences: Dict[str, FrameSequence]  # sequence_id -> frames at this config's FoV
    labels: Dict[str, List[LabelRecord]]  # sequence_id -> filtered ground truth
    event_streams: Dict[str, EventStream]
    histogram_paths: Dict[str, str]  # sequence_id -> SHR1 file, one record per window
    window_frames: Dict[str, List[int]]  # sequence_id -> label frame index of each window
    predictions: Dict[str, List[PredictionRecord]]
    metrics: Dict[MetricId, Optional[float]]

    # Pipeline metadata
    pipeline_metrics: Dict[str, Any]
    pipeline_step: str
    errors: List[str]
    warnings: List[str]
    execution_time: Optional[float]


class ConfigRunStatus(BaseModel):
    """One row of the sweep status table"""
    config_id: str
    status: str  # "ok" or "failed"
    sequences: int = 0
    events: int = 0
    events_per_second: float = 0.0
    windows: int = 0
    detections: int = 0
    execution_time: float = 0.0
    errors: List[str] = []


class SweepResult(BaseModel):
    test_set: str
    statuses: List[ConfigRunStatus] = []
    per_config_metrics: Dict[str, Dict[MetricId, Optional[float]]] = {}
    output_files: Dict[str, str] = {}
    execution_time: float = 0.0

    @property
    def failed(self) -> List[str]:
        return [s.config_id for s in self.statuses if s.status != "ok"]
