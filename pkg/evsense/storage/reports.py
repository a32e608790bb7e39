# Tabular run outputs: score CSV, long-format parameter table, status table and summary JSON
import json
import logging
import os
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Union

import pandas as pd

from evsense.exceptions import MalformedDocumentError
from evsense.models.evaluation_models import METRIC_IDS, MetricId, ScoreReport
from evsense.services.config_registry import config_registry
from evsense.services.evaluation_service import relative_change

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

SCORES_FILE = "scores.csv"
REPORT_FILE = "report.csv"
STATUS_FILE = "status.csv"
SUMMARY_FILE = "summary.json"

SCORE_COLUMNS = ["test_set", "config_id", "metric", "value"]
REPORT_COLUMNS = ["test_set", "config_id", "group", "th_p", "th_n", "refractory_ms", "fov_deg",
                  "metric", "value", "relative_change"]
MEAN_ROW_ID = "mean"
REFERENCE_CONFIG = "base"

PerConfigMetrics = Mapping[str, Mapping[MetricId, Optional[float]]]


def scores_frame(reports: Iterable[ScoreReport]) -> pd.DataFrame:
    """Per-config rows followed by the mean row, per test set and metric"""
    rows = []
    for report in reports:
        for metric in METRIC_IDS:
            if metric not in report.summary:
                continue
            for config_id, values in report.per_config.items():
                rows.append((report.test_set, config_id, metric.value, values.get(metric)))
            rows.append((report.test_set, MEAN_ROW_ID, metric.value, report.summary[metric].mean))
    return pd.DataFrame(rows, columns=SCORE_COLUMNS)


def long_format_frame(per_config_metrics: PerConfigMetrics, test_set: str = "") -> pd.DataFrame:
    """Plot-ready table: one row per configuration and metric, with the sensor parameters"""
    reference = per_config_metrics.get(REFERENCE_CONFIG)
    rows = []
    for config_id in _registry_order(per_config_metrics):
        config = config_registry.get(config_id)
        for metric in METRIC_IDS:
            value = per_config_metrics[config_id].get(metric)
            rows.append((
                test_set, config_id, config.group, config.th_p, config.th_n, config.refractory_ms, config.fov_deg,
                metric.value, value, relative_change(value, reference.get(metric) if reference else None),
            ))
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def status_frame(statuses) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.config_id, s.status, s.sequences, s.events, s.windows, s.detections, "; ".join(s.errors))
         for s in statuses],
        columns=["config_id", "status", "sequences", "events", "windows", "detections", "errors"],
    )


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.6f")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def summary_document(reports: Iterable[ScoreReport], extra: Optional[Dict] = None) -> Dict:
    document = dict(extra or {})
    document["scores"] = {
        report.test_set: {
            metric.value: summary.model_dump() for metric, summary in report.summary.items()
        }
        for report in reports
    }
    return document


def write_summary(document: Dict, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(document, indent=2, sort_keys=True), encoding="utf-8")
    return path


def read_metrics_table(path: PathLike) -> Dict[str, Dict[MetricId, Optional[float]]]:
    """Per-config metrics from a score CSV or long-format report CSV; mean rows are skipped"""
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MalformedDocumentError(f"Cannot parse metrics table {path}: {e}") from e
    missing = {"config_id", "metric", "value"} - set(frame.columns)
    if missing:
        raise MalformedDocumentError(f"Metrics table {path} lacks columns {sorted(missing)}")

    metrics: Dict[str, Dict[MetricId, Optional[float]]] = {}
    for row in frame.itertuples(index=False):
        if row.config_id == MEAN_ROW_ID:
            continue
        try:
            metric = MetricId(row.metric)
        except ValueError:
            raise MalformedDocumentError(f"Unknown metric '{row.metric}' in {path}") from None
        value = None if pd.isna(row.value) else float(row.value)
        metrics.setdefault(str(row.config_id), {})[metric] = value
    return metrics


def format_table(frame: pd.DataFrame) -> str:
    return frame.to_string(index=False, float_format=lambda v: f"{v:.4f}", na_rep="n/a")


def _registry_order(config_ids: Iterable[str]) -> List[str]:
    present = set(config_ids)
    ordered = [cid for cid in config_registry.ids() if cid in present]
    unknown = sorted(present - set(ordered))
    for config_id in unknown:
        config_registry.get(config_id)  # raises UnknownConfigError
    return ordered


def read_table(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)
