import argparse
import logging
from typing import Dict, List, Optional, Tuple

import pandas as pd

from evsense.cli.common import EXIT_OK
from evsense.exceptions import InvalidParameterError
from evsense.models.evaluation_models import MetricId, ScoreReport
from evsense.models.run_config import RunConfig
from evsense.services.dataset_service import PARTITIONS
from evsense.services.evaluation_service import PUBLISHED_AP, EvaluationService
from evsense.storage import reports

logger = logging.getLogger(__name__)

ALL_SOURCES = "all"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "report", parents=parents, argument_default=argparse.SUPPRESS,
        help="Aggregate per-config metrics into per-test-set scores",
    )
    parser.add_argument("--metrics", help="scores.csv or report.csv written by a sweep")
    parser.add_argument("--published", choices=[ALL_SOURCES] + sorted(PUBLISHED_AP),
                        help="Use the published per-config AP values instead of a metrics table")
    parser.set_defaults(handler=run)


def published_metrics(source: str) -> List[Tuple[str, Dict[str, Dict[MetricId, Optional[float]]]]]:
    names = sorted(PUBLISHED_AP) if source == ALL_SOURCES else [source]
    return [
        (name, {config_id: {MetricId.AP: value} for config_id, value in PUBLISHED_AP[name].items()})
        for name in names
    ]


def run(run_config: RunConfig) -> int:
    if run_config.published and run_config.metrics:
        raise InvalidParameterError("use either --metrics or --published")
    if run_config.published:
        sources = published_metrics(run_config.published)
    elif run_config.metrics:
        sources = [(run_config.metrics, reports.read_metrics_table(run_config.metrics))]
    else:
        raise InvalidParameterError("report needs --metrics or --published")

    service = EvaluationService()
    frames = []
    summaries = {}
    for source, per_config in sources:
        score_reports: List[ScoreReport] = service.score_partitions(per_config, PARTITIONS.values())
        if not score_reports:
            logger.warning(f"{source}: no partition is fully covered by the available configurations")
        frame = reports.scores_frame(score_reports)
        frame.insert(0, "source", source)
        frames.append(frame)
        summaries[source] = reports.summary_document(score_reports)["scores"]

        print(f"== {source}")
        for report in score_reports:
            print(f"{report.test_set:>6}: " + ", ".join(
                f"{metric.value}={summary.mean:.2f}±{summary.std:.2f}"
                for metric, summary in report.summary.items() if summary.mean is not None
            ))

    out_dir = run_config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    reports.write_csv(pd.concat(frames, ignore_index=True), out_dir / reports.SCORES_FILE)
    reports.write_summary({"sources": summaries}, out_dir / reports.SUMMARY_FILE)
    run_config.save()
    return EXIT_OK
