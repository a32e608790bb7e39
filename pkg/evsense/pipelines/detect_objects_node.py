from typing import TYPE_CHECKING
import logging
from pathlib import Path

from evsense.models.detection_models import PredictionRecord
from evsense.services.detector_service import BlobDetector
from evsense.storage.documents import write_predictions
from evsense.storage.event_io import read_histograms

if TYPE_CHECKING:
    from evsense.models.pipeline_models import SweepState

logger = logging.getLogger(__name__)

PREDICTIONS_FILE = "predictions.ndjson"


def detect_objects_node(state: 'SweepState') -> 'SweepState':
    """
    Run the blob detector over every stored histogram and write
    <out>/<config>/predictions.ndjson
    """
    if state.get("pipeline_step") == "error":
        return state
    try:
        config = state["sensor_config"]
        detector = BlobDetector(state["run_config"].detector)

        predictions = {}
        detections = 0
        for sequence_id, path in state.get("histogram_paths", {}).items():
            frame_indices = state["window_frames"][sequence_id]
            records = []
            for frame_index, hist in zip(frame_indices, read_histograms(path, clip=state["run_config"].clip)):
                found = detector.detect(hist)
                detections += len(found)
                records.append(PredictionRecord.from_detections(sequence_id, frame_index, found))
            predictions[sequence_id] = records

        write_predictions(
            (record for sequence_id in sorted(predictions) for record in predictions[sequence_id]),
            Path(state["out_dir"]) / PREDICTIONS_FILE,
        )

        state["predictions"] = predictions
        state["pipeline_metrics"]["detections"] = detections
        state["pipeline_step"] = "objects_detected"

        logger.info(f"[{config.id}] Detected {detections} objects")
        return state

    except Exception as e:
        logger.error(f"Error in detect_objects_node: {str(e)}")
        state["errors"].append(f"Detection error: {str(e)}")
        state["pipeline_step"] = "error"
        return state
