import argparse
import logging
from pathlib import Path
from typing import Dict, List

from evsense.cli.common import (
    EXIT_OK,
    EXIT_PARTIAL,
    FRAMES_FILE,
    LABELS_FILE,
    SCENE_SPEC_FILE,
    add_detector_arguments,
    add_representation_arguments,
)
from evsense.exceptions import InsufficientInputError, InvalidParameterError
from evsense.models.dataset_models import Partition, Split
from evsense.models.pipeline_models import SweepSequence
from evsense.models.run_config import RunConfig
from evsense.pipelines.sweep_orchestrator import sweep_orchestrator
from evsense.services.dataset_service import dataset_service
from evsense.storage import reports
from evsense.storage.documents import load_manifest, resolve_path

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "sweep", parents=parents, argument_default=argparse.SUPPRESS,
        help="Run transduce -> represent -> detect -> evaluate for every configuration of a partition",
    )
    parser.add_argument("--partition", help="train, test1, test2, test3 or test4")
    parser.add_argument("--scenes", nargs="+",
                        help=f"Scene directories holding {FRAMES_FILE} and {LABELS_FILE} (from gen-scene)")
    parser.add_argument("--manifest", help="Dataset manifest; its sequences for the partition are used")
    parser.add_argument("--split", choices=[s.value for s in Split], help="Only manifest sequences of this split")
    add_representation_arguments(parser)
    add_detector_arguments(parser)
    parser.set_defaults(handler=run)


def scene_sequences(scene_dirs: List[str], partition: Partition) -> Dict[str, List[SweepSequence]]:
    """Every scene directory feeds every configuration of the partition"""
    sequences = []
    for scene_dir in sorted(scene_dirs):
        directory = Path(scene_dir)
        for name in (FRAMES_FILE, LABELS_FILE):
            if not (directory / name).exists():
                raise FileNotFoundError(f"scene directory {directory} lacks {name}")
        spec_path = directory / SCENE_SPEC_FILE
        sequences.append(SweepSequence(
            sequence_id=directory.name,
            frames_path=str(directory / FRAMES_FILE),
            labels_path=str(directory / LABELS_FILE),
            scene_spec_path=str(spec_path) if spec_path.exists() else None,
        ))
    if len({s.sequence_id for s in sequences}) != len(sequences):
        raise InvalidParameterError("scene directories must have distinct names")
    return {config_id: sequences for config_id in partition.ordered_ids()}


def manifest_sequences(manifest_path: str, split: str, partition: Partition) -> Dict[str, List[SweepSequence]]:
    """Manifest entries grouped by configuration; each entry is recorded under its own configuration"""
    manifest = load_manifest(manifest_path, check_paths=True)
    entries = dataset_service.sequences_for(manifest, Split(split) if split else None, partition.name)
    by_config: Dict[str, List[SweepSequence]] = {}
    for entry in entries:
        by_config.setdefault(entry.config_id, []).append(SweepSequence(
            sequence_id=entry.sequence_id,
            frames_path=str(resolve_path(manifest_path, entry.frames_path)),
            labels_path=str(resolve_path(manifest_path, entry.labels_path)),
        ))
    return by_config


def run(run_config: RunConfig) -> int:
    if not run_config.partition:
        raise InvalidParameterError("--partition is required")
    partition = dataset_service.partition_for(run_config.partition)

    if run_config.scenes and run_config.manifest:
        raise InvalidParameterError("use either --scenes or --manifest")
    if run_config.scenes:
        sequences_by_config = scene_sequences(run_config.scenes, partition)
    elif run_config.manifest:
        sequences_by_config = manifest_sequences(run_config.manifest, run_config.split, partition)
    else:
        raise InvalidParameterError("sweep needs --scenes or --manifest")

    if not any(sequences_by_config.values()):
        raise InsufficientInputError(f"no input sequences for partition {partition.name}")

    run_config.save()
    result = sweep_orchestrator.run_sweep(run_config, sequences_by_config, partition)

    print(reports.format_table(reports.status_frame(result.statuses)))
    print()
    print(reports.format_table(reports.read_table(result.output_files["scores"])))
    print(f"outputs -> {run_config.out_dir}")
    return EXIT_PARTIAL if result.failed else EXIT_OK
