import argparse
import logging
from typing import Dict

from evsense.cli.common import (
    EXIT_OK,
    HISTOGRAMS_FILE,
    LABELS_FILE,
    PREDICTIONS_FILE,
    add_detector_arguments,
    input_file,
)
from evsense.models.detection_models import PredictionRecord
from evsense.models.run_config import RunConfig
from evsense.services.detector_service import BlobDetector
from evsense.storage.documents import read_labels, write_predictions
from evsense.storage.event_io import read_histograms

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "detect", parents=parents, argument_default=argparse.SUPPRESS,
        help="Run the blob detector over SHR1 histograms and write a predictions document",
    )
    parser.add_argument("--histograms", help=f"SHR1 file, or a directory holding {HISTOGRAMS_FILE}")
    parser.add_argument("--labels", help="Labels document used to map windows to frame indices")
    parser.add_argument("--sequence-id", dest="sequence_id", help="Sequence id for the records (default: seq)")
    add_detector_arguments(parser)
    parser.set_defaults(handler=run)


def run(run_config: RunConfig) -> int:
    histograms_path = input_file(run_config.histograms, HISTOGRAMS_FILE, "--histograms")
    frame_by_end: Dict[int, int] = {}
    if run_config.labels:
        frame_by_end = {r.t_ns: r.frame_index for r in read_labels(input_file(run_config.labels, LABELS_FILE, "--labels"))}
    else:
        logger.warning("No labels given; windows are numbered in file order")

    sequence_id = run_config.sequence_id or "seq"
    detector = BlobDetector(run_config.detector)
    records = []
    for ordinal, hist in enumerate(read_histograms(histograms_path, clip=run_config.clip)):
        frame_index = frame_by_end.get(hist.window_end, ordinal)
        records.append(PredictionRecord.from_detections(sequence_id, frame_index, detector.detect(hist)))

    out_dir = run_config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    write_predictions(records, out_dir / PREDICTIONS_FILE)
    run_config.save()

    detections = sum(len(r.boxes) for r in records)
    print(f"{detections} detections over {len(records)} windows -> {out_dir / PREDICTIONS_FILE}")
    return EXIT_OK
