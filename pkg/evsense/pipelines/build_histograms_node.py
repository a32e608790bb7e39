from typing import TYPE_CHECKING
import logging
from pathlib import Path

from evsense.services.representation_service import representation_service
from evsense.storage.event_io import write_histograms

if TYPE_CHECKING:
    from evsense.models.pipeline_models import SweepState

logger = logging.getLogger(__name__)


def build_histograms_node(state: 'SweepState') -> 'SweepState':
    """
    Build one stacked histogram per label frame and stream them into
    <out>/<config>/<sequence>.shr, one SHR1 record per window
    """
    if state.get("pipeline_step") == "error":
        return state
    try:
        config = state["sensor_config"]
        run_config = state["run_config"]
        out_dir = Path(state["out_dir"])

        histogram_paths = {}
        window_frames = {}
        windows = 0
        for sequence_id, stream in state.get("event_streams", {}).items():
            spec = run_config.representation_spec(stream.width, stream.height)
            plan, frame_indices = representation_service.plan_for_labels(state["labels"][sequence_id], spec)
            state["warnings"].extend(f"{sequence_id}: {w}" for w in plan.warnings)

            path = out_dir / f"{sequence_id}.shr"
            write_histograms(representation_service.iter_window_histograms(stream, plan, spec), path)

            histogram_paths[sequence_id] = str(path)
            window_frames[sequence_id] = frame_indices
            windows += len(plan.windows)

        state["histogram_paths"] = histogram_paths
        state["window_frames"] = window_frames
        state["pipeline_metrics"]["windows"] = windows
        state["pipeline_step"] = "histograms_built"

        logger.info(f"[{config.id}] Built {windows} stacked histograms")
        return state

    except Exception as e:
        logger.error(f"Error in build_histograms_node: {str(e)}")
        state["errors"].append(f"Representation error: {str(e)}")
        state["pipeline_step"] = "error"
        return state
