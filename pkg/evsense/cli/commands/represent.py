import argparse
import logging

from evsense.cli.common import (
    EVENTS_FILE,
    EXIT_OK,
    HISTOGRAMS_FILE,
    LABELS_FILE,
    add_representation_arguments,
    input_file,
)
from evsense.models.run_config import RunConfig
from evsense.services.representation_service import RepresentationService
from evsense.storage.documents import read_labels
from evsense.storage.event_io import read_events, write_histograms

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "represent", parents=parents, argument_default=argparse.SUPPRESS,
        help="Build label-aligned stacked histograms (SHR1) from an EVT1 stream",
    )
    parser.add_argument("--events", help=f"EVT1 file, or a directory holding {EVENTS_FILE}")
    parser.add_argument("--labels", help=f"Labels document, or a directory holding {LABELS_FILE}")
    add_representation_arguments(parser)
    parser.set_defaults(handler=run)


def run(run_config: RunConfig) -> int:
    stream = read_events(input_file(run_config.events, EVENTS_FILE, "--events"))
    labels = read_labels(input_file(run_config.labels, LABELS_FILE, "--labels"))

    service = RepresentationService()
    spec = run_config.representation_spec(stream.width, stream.height)
    plan, frame_indices = service.plan_for_labels(labels, spec)

    out_dir = run_config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    size = write_histograms(service.iter_window_histograms(stream, plan, spec), out_dir / HISTOGRAMS_FILE)
    run_config.save()

    print(f"{len(plan.windows)} windows of {spec.window_len_ns}ns x {spec.n_bins} bins "
          f"({size} bytes) -> {out_dir / HISTOGRAMS_FILE}")
    for warning in plan.warnings:
        print(f"warning: {warning}")
    return EXIT_OK
