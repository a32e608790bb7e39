from typing import TYPE_CHECKING
import logging
from pathlib import Path

from evsense.models.dataset_models import LabelRecord
from evsense.models.scene_models import SceneSpec
from evsense.services.dataset_service import dataset_service
from evsense.services.scene_service import scene_service
from evsense.storage.documents import read_labels
from evsense.storage.event_io import read_frames

if TYPE_CHECKING:
    from evsense.models.pipeline_models import SweepState

logger = logging.getLogger(__name__)


def prepare_sequences_node(state: 'SweepState') -> 'SweepState':
    """
    Load frames and ground truth for every input sequence of a configuration

    Functionality:
    - Re-render scenes at the configuration's field of view when the scene spec is available
    - Otherwise read the FRM1 frames and labels document as stored
    - Apply the dataset box filter to the ground truth
    """
    try:
        config = state["sensor_config"]
        logger.info(f"[{config.id}] Preparing {len(state.get('sequences', []))} sequences")

        frame_sequences = {}
        labels = {}
        removed_boxes = 0
        rendered = 0

        for sequence in state.get("sequences", []):
            spec_path = Path(sequence.scene_spec_path) if sequence.scene_spec_path else None
            if spec_path is not None and spec_path.exists():
                scene = SceneSpec.model_validate_json(spec_path.read_text(encoding="utf-8"))
            else:
                scene = None

            if scene is not None and scene.fov_deg != config.fov_deg:
                # F_v is render-time geometry
                frames, raw_labels = scene_service.generate_sequence(scene, fov_deg=config.fov_deg)
                rendered += 1
            else:
                frames = read_frames(sequence.frames_path, fov_deg=scene.fov_deg if scene else config.fov_deg)
                raw_labels = read_labels(sequence.labels_path)

            kept = []
            for record in raw_labels:
                boxes = dataset_service.filter_boxes(record.boxes)
                removed_boxes += len(record.boxes) - len(boxes)
                kept.append(LabelRecord(frame_index=record.frame_index, t_ns=record.t_ns, boxes=boxes))

            frame_sequences[sequence.sequence_id] = frames
            labels[sequence.sequence_id] = kept

        state["frame_sequences"] = frame_sequences
        state["labels"] = labels
        state["pipeline_metrics"]["sequences"] = len(frame_sequences)
        state["pipeline_metrics"]["rerendered_sequences"] = rendered
        state["pipeline_metrics"]["filtered_boxes"] = removed_boxes
        state["pipeline_metrics"]["ground_truth_boxes"] = sum(
            len(r.boxes) for records in labels.values() for r in records
        )
        state["pipeline_step"] = "sequences_prepared"

        logger.info(f"[{config.id}] Prepared {len(frame_sequences)} sequences "
                    f"({rendered} re-rendered, {removed_boxes} boxes filtered)")
        return state

    except Exception as e:
        logger.error(f"Error in prepare_sequences_node: {str(e)}")
        state["errors"].append(f"Sequence preparation error: {str(e)}")
        state["pipeline_step"] = "error"
        return state
