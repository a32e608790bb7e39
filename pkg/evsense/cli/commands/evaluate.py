import argparse
import json
import logging

from evsense.cli.common import EXIT_OK, LABELS_FILE, METRICS_FILE, PREDICTIONS_FILE, input_file
from evsense.models.run_config import RunConfig
from evsense.services.dataset_service import dataset_service
from evsense.services.evaluation_service import EvaluationService
from evsense.storage.documents import read_labels, read_predictions

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "eval", parents=parents, argument_default=argparse.SUPPRESS,
        help="Score a predictions document against labels with COCO-style metrics",
    )
    parser.add_argument("--predictions", help=f"Predictions document, or a directory holding {PREDICTIONS_FILE}")
    parser.add_argument("--labels", help=f"Labels document, or a directory holding {LABELS_FILE}")
    parser.add_argument("--sequence-id", dest="sequence_id", help="Only score records of this sequence")
    parser.add_argument("--no-filter", dest="filter_labels", action="store_false",
                        help="Keep ground-truth boxes below the dataset size limits")
    parser.set_defaults(handler=run)


def run(run_config: RunConfig) -> int:
    predictions = read_predictions(input_file(run_config.predictions, PREDICTIONS_FILE, "--predictions"))
    labels = read_labels(input_file(run_config.labels, LABELS_FILE, "--labels"))
    if run_config.sequence_id:
        predictions = [p for p in predictions if p.sequence_id == run_config.sequence_id]

    boxes_by_frame = {
        r.frame_index: dataset_service.filter_boxes(r.boxes) if run_config.filter_labels else r.boxes
        for r in labels
    }
    preds = [record.detections() for record in predictions]
    gts = [boxes_by_frame.get(record.frame_index, []) for record in predictions]
    metrics = EvaluationService().coco_metrics(preds, gts)

    document = {metric.value: value for metric, value in metrics.items()}
    out_dir = run_config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / METRICS_FILE).write_text(json.dumps(document, indent=2), encoding="utf-8")
    run_config.save()

    print(f"{len(preds)} frames, {sum(len(g) for g in gts)} ground-truth boxes")
    for name, value in document.items():
        print(f"{name:>5}: {'n/a' if value is None else f'{value:.4f}'}")
    return EXIT_OK
