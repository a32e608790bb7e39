from typing import Any, Dict, TYPE_CHECKING
import logging

if TYPE_CHECKING:
    from evsense.models.pipeline_models import SweepState

logger = logging.getLogger(__name__)

# Alert thresholds
MIN_EVENTS = 1
MAX_WARNINGS = 10


def monitor_sweep_node(state: 'SweepState') -> 'SweepState':
    """
    Log the run report of one configuration and raise alerts

    Functionality:
    - Report status, event counts, event rate, windows and detections
    - Alert on failures, silent sensors and overlapping or skipped windows
    """
    try:
        config = state["sensor_config"]
        metrics = state.get("pipeline_metrics", {})
        errors = state.get("errors", [])
        warnings = state.get("warnings", [])
        status = "failed" if errors or state.get("pipeline_step") == "error" else "ok"

        logger.info(f"=== Sweep report for {config.id} ({config.describe()}) ===")
        logger.info(f"Status: {status.upper()}")
        logger.info(f"Sequences: {metrics.get('sequences', 0)} "
                    f"(re-rendered {metrics.get('rerendered_sequences', 0)})")
        logger.info(f"Events: {metrics.get('events', 0)} "
                    f"({metrics.get('events_per_second', 0.0):.1f} events/s)")
        logger.info(f"Windows: {metrics.get('windows', 0)}, detections: {metrics.get('detections', 0)}")

        if errors:
            logger.warning("--- Errors Encountered ---")
            for i, error in enumerate(errors[:5], 1):
                logger.warning(f"Error {i}: {error}")

        _raise_alerts(config.id, status, metrics, warnings)

        state["pipeline_metrics"]["status"] = status
        return state

    except Exception as e:
        logger.error(f"Error in monitor_sweep_node: {str(e)}")
        state["errors"].append(f"Monitoring error: {str(e)}")
        return state


def _raise_alerts(config_id: str, status: str, metrics: Dict[str, Any], warnings) -> None:
    if status != "ok":
        logger.warning(f"ALERT: configuration {config_id} failed")
        return
    if metrics.get("events", 0) < MIN_EVENTS:
        logger.warning(f"ALERT: configuration {config_id} produced no events; check thresholds and scene motion")
    if metrics.get("windows", 0) == 0:
        logger.warning(f"ALERT: configuration {config_id} has no label-aligned windows to evaluate")
    if any("overlap" in w for w in warnings):
        logger.warning(f"ALERT: configuration {config_id} uses overlapping windows")
    if len(warnings) > MAX_WARNINGS:
        logger.warning(f"ALERT: high warning count ({len(warnings)}) for configuration {config_id}")
