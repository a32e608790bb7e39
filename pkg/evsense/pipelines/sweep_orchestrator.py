# Sensor-configuration sweep orchestrator
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Dict, List
import logging

try:
    from langgraph.graph import StateGraph, END
except ImportError:  # sequential fallback below
    StateGraph, END = None, None

from evsense.models.dataset_models import Partition
from evsense.models.pipeline_models import ConfigRunStatus, SweepResult, SweepSequence, SweepState
from evsense.models.run_config import RunConfig
from evsense.models.sensor_models import SensorConfig
from evsense.pipelines.build_histograms_node import build_histograms_node
from evsense.pipelines.detect_objects_node import detect_objects_node
from evsense.pipelines.evaluate_detections_node import evaluate_detections_node
from evsense.pipelines.monitor_sweep_node import monitor_sweep_node
from evsense.pipelines.prepare_sequences_node import prepare_sequences_node
from evsense.pipelines.transduce_events_node import transduce_events_node
from evsense.services.config_registry import config_registry
from evsense.services.dataset_service import PARTITIONS
from evsense.services.evaluation_service import evaluation_service
from evsense.storage import reports

logger = logging.getLogger(__name__)

_NODES = [
    ("prepare_sequences", prepare_sequences_node),
    ("transduce_events", transduce_events_node),
    ("build_histograms", build_histograms_node),
    ("detect_objects", detect_objects_node),
    ("evaluate_detections", evaluate_detections_node),
    ("monitor_sweep", monitor_sweep_node),
]


class SweepOrchestrator:
    """
    Runs every configuration of a partition through the per-config pipeline:
    1. Prepare sequences (load, or re-render at the configuration's FoV)
    2. Transduce events (EVT1 per sequence)
    3. Build stacked histograms (SHR1 per sequence)
    4. Detect objects (predictions document)
    5. Evaluate detections (COCO-style metrics)
    6. Monitor (run report and alerts)
    Configurations run in parallel; each writes only under its own output directory.
    """

    def __init__(self):
        self.graph = None
        self._build_graph()

    def _build_graph(self):
        """Build the per-configuration LangGraph workflow"""
        try:
            if StateGraph is None:
                logger.warning("LangGraph not available, using sequential execution")
                return

            workflow = StateGraph(SweepState)
            for name, node in _NODES:
                workflow.add_node(name, node)

            workflow.set_entry_point(_NODES[0][0])
            for (current, _), (following, _) in zip(_NODES, _NODES[1:]):
                workflow.add_edge(current, following)
            workflow.add_edge(_NODES[-1][0], END)

            self.graph = workflow.compile()
            logger.info("Sweep LangGraph workflow compiled successfully")

        except Exception as e:
            logger.error(f"Error building sweep LangGraph workflow: {str(e)}")
            self.graph = None

    def run_single_config(self, config: SensorConfig, sequences: List[SweepSequence],
                   run_config: RunConfig, test_set: str = "") -> SweepState:
        """Run one configuration end to end and return its final state"""
        start_time = datetime.utcnow()
        initial_state: SweepState = {
            "sensor_config": config,
            "test_set": test_set,
            "sequences": list(sequences),
            "run_config": run_config,
            "out_dir": str(run_config.out_dir / config.id),
            "frame_sequences": {},
            "labels": {},
            "event_streams": {},
            "histogram_paths": {},
            "window_frames": {},
            "predictions": {},
            "metrics": {},
            "pipeline_metrics": {},
            "pipeline_step": "initialized",
            "errors": [],
            "warnings": [],
            "execution_time": None,
        }

        try:
            if self.graph:
                result = self.graph.invoke(initial_state)
            else:
                # Nodes skip their work once a previous node has failed
                result = initial_state
                for _, node in _NODES:
                    result = node(result)
        except Exception as e:
            logger.error(f"Error in sweep pipeline for {config.id}: {str(e)}")
            result = initial_state
            result["errors"].append(str(e))
            result["pipeline_step"] = "error"

        result["execution_time"] = (datetime.utcnow() - start_time).total_seconds()
        return result

    def run_sweep(self, run_config: RunConfig, sequences_by_config: Dict[str, List[SweepSequence]],
                  partition: Partition) -> SweepResult:
        """
        Run every configuration of the partition and write the sweep outputs:
        per-config EVT1/SHR1/predictions, scores.csv, report.csv, status.csv and summary.json
        """
        start_time = datetime.utcnow()
        config_ids = partition.ordered_ids()
        logger.info(f"Starting sweep over {partition.name}: {', '.join(config_ids)} "
                    f"with {run_config.workers} workers")

        def run_one(config_id: str) -> SweepState:
            return self.run_single_config(config_registry.get(config_id), sequences_by_config.get(config_id, []),
                                   run_config, partition.name)

        if run_config.workers > 1 and len(config_ids) > 1:
            with ThreadPoolExecutor(max_workers=run_config.workers) as pool:
                states = list(pool.map(run_one, config_ids))
        else:
            states = [run_one(config_id) for config_id in config_ids]

        result = SweepResult(test_set=partition.name)
        for config_id, state in zip(config_ids, states):
            metrics = state.get("pipeline_metrics", {})
            ok = not state.get("errors")
            result.statuses.append(ConfigRunStatus(
                config_id=config_id,
                status="ok" if ok else "failed",
                sequences=metrics.get("sequences", 0),
                events=metrics.get("events", 0),
                events_per_second=metrics.get("events_per_second", 0.0),
                windows=metrics.get("windows", 0),
                detections=metrics.get("detections", 0),
                execution_time=state.get("execution_time") or 0.0,
                errors=[str(e) for e in state.get("errors", [])],
            ))
            if ok:
                result.per_config_metrics[config_id] = state["metrics"]

        result.output_files = self.write_outputs(result, run_config.out_dir)
        result.execution_time = (datetime.utcnow() - start_time).total_seconds()

        logger.info(f"Sweep over {partition.name} completed in {result.execution_time:.2f}s "
                    f"({len(result.failed)} failed configurations)")
        if result.failed:
            logger.warning(f"ALERT: failed configurations: {', '.join(result.failed)}")
        return result

    def write_outputs(self, result: SweepResult, out_dir: Path) -> Dict[str, str]:
        partition = PARTITIONS.get(result.test_set)
        score_reports = []
        if partition is not None and not result.failed:
            score_reports = [evaluation_service.score_k(result.per_config_metrics, partition)]
        elif result.failed:
            logger.warning(f"Score for {result.test_set} not computed: incomplete configuration set")

        files = {
            "scores": reports.write_csv(reports.scores_frame(score_reports) if score_reports else
                                        _partial_scores(result), out_dir / reports.SCORES_FILE),
            "report": reports.write_csv(reports.long_format_frame(result.per_config_metrics, result.test_set),
                                        out_dir / reports.REPORT_FILE),
            "status": reports.write_csv(reports.status_frame(result.statuses), out_dir / reports.STATUS_FILE),
        }
        summary = reports.summary_document(score_reports, {
            "test_set": result.test_set,
            "status": {s.config_id: s.status for s in result.statuses},
        })
        files["summary"] = reports.write_summary(summary, out_dir / reports.SUMMARY_FILE)
        return {name: str(path) for name, path in files.items()}


def _partial_scores(result: SweepResult):
    """Config rows without a mean row when the partition could not be scored"""
    frame = reports.long_format_frame(result.per_config_metrics, result.test_set)
    return frame[reports.SCORE_COLUMNS]


# Global orchestrator instance
sweep_orchestrator = SweepOrchestrator()
