from typing import TYPE_CHECKING
import logging
from pathlib import Path

from evsense.services.transduction_service import TransductionService
from evsense.storage.event_io import write_events

if TYPE_CHECKING:
    from evsense.models.pipeline_models import SweepState

logger = logging.getLogger(__name__)

# Configurations already run in parallel; each transduces on one thread
_transduction = TransductionService(workers=1)


def transduce_events_node(state: 'SweepState') -> 'SweepState':
    """
    Convert every frame sequence into an event stream under the configuration
    and write it as <out>/<config>/<sequence>.evt
    """
    if state.get("pipeline_step") == "error":
        return state
    try:
        config = state["sensor_config"]
        out_dir = Path(state["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)

        streams = {}
        total_events = 0
        total_duration = 0.0
        for sequence_id, frames in state.get("frame_sequences", {}).items():
            stream = _transduction.transduce_sequence(frames, config)
            write_events(stream, out_dir / f"{sequence_id}.evt")
            streams[sequence_id] = stream

            total_events += len(stream)
            if len(frames) > 1:
                total_duration += (int(frames.timestamps[-1]) - int(frames.timestamps[0])) / 1e9
            logger.debug(f"[{config.id}] {sequence_id}: {len(stream)} events")

        state["event_streams"] = streams
        state["pipeline_metrics"]["events"] = total_events
        state["pipeline_metrics"]["events_per_second"] = (
            total_events / total_duration if total_duration > 0 else 0.0
        )
        state["pipeline_step"] = "events_transduced"

        logger.info(f"[{config.id}] Transduced {total_events} events over {len(streams)} sequences")
        return state

    except Exception as e:
        logger.error(f"Error in transduce_events_node: {str(e)}")
        state["errors"].append(f"Transduction error: {str(e)}")
        state["pipeline_step"] = "error"
        return state
