# Sensor models
from .sensor_models import Event, EventStream, EventStreamStats, FrameSequence, PixelState, Polarity, SensorConfig

# Scene models
from .scene_models import CameraModel, SceneObject, SceneSpec

# Representation models
from .representation_models import RepresentationSpec, StackedHistogram, WindowPlan

# Dataset models
from .dataset_models import BBox, DatasetManifest, LabelRecord, Partition, SequenceEntry, Split

# Detection and evaluation models
from .detection_models import Detection, DetectorParams, PredictionRecord
from .evaluation_models import MatchResult, MetricId, MetricSummary, ScoreReport

# Run configuration and pipeline models
from .run_config import RunConfig
from .pipeline_models import SweepSequence, SweepState
