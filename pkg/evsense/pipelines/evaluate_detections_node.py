from typing import TYPE_CHECKING
import logging

from evsense.models.evaluation_models import METRIC_IDS
from evsense.services.evaluation_service import evaluation_service

if TYPE_CHECKING:
    from evsense.models.pipeline_models import SweepState

logger = logging.getLogger(__name__)


def evaluate_detections_node(state: 'SweepState') -> 'SweepState':
    """
    Score the configuration's predictions against the filtered ground truth of every
    windowed label frame, pooled over all sequences
    """
    if state.get("pipeline_step") == "error":
        return state
    try:
        config = state["sensor_config"]
        preds, gts = [], []
        for sequence_id in sorted(state.get("predictions", {})):
            boxes_by_frame = {r.frame_index: r.boxes for r in state["labels"][sequence_id]}
            for record in state["predictions"][sequence_id]:
                preds.append(record.detections())
                gts.append(boxes_by_frame.get(record.frame_index, []))

        if sum(len(boxes) for boxes in gts) == 0:
            state["warnings"].append("no ground-truth boxes in any evaluated frame; metrics reported as 0")
            logger.warning(f"[{config.id}] {state['warnings'][-1]}")
            metrics = {metric: 0.0 for metric in METRIC_IDS}
        else:
            metrics = evaluation_service.coco_metrics(preds, gts)

        state["metrics"] = metrics
        state["pipeline_metrics"]["evaluated_frames"] = len(gts)
        state["pipeline_step"] = "completed"

        logger.info(f"[{config.id}] " + ", ".join(
            f"{m.value}={'n/a' if v is None else f'{v:.4f}'}" for m, v in metrics.items()
        ))
        return state

    except Exception as e:
        logger.error(f"Error in evaluate_detections_node: {str(e)}")
        state["errors"].append(f"Evaluation error: {str(e)}")
        state["pipeline_step"] = "error"
        return state
