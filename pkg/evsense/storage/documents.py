# Structured-text documents: labels, predictions (newline-delimited JSON) and the dataset manifest (JSON)
import json
import logging
import os
from pathlib import Path
from typing import Dict, Iterable, List, Union

from pydantic import ValidationError

from evsense.exceptions import (
    DuplicateSequenceError,
    MalformedDocumentError,
    MalformedManifestError,
    MissingPathError,
)
from evsense.models.dataset_models import DatasetManifest, LabelRecord
from evsense.models.detection_models import PredictionRecord
from evsense.services.config_registry import config_registry

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def _write_ndjson(records: Iterable, path: PathLike) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json())
            handle.write("\n")
            count += 1
    return count


def _read_ndjson(path: PathLike, model) -> List:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                records.append(model.model_validate_json(line))
            except ValidationError as e:
                raise MalformedDocumentError(f"{path}:{line_no}: invalid {model.__name__} record: {e}") from e
    return records


def write_labels(labels: Iterable[LabelRecord], path: PathLike) -> int:
    return _write_ndjson(labels, path)


def read_labels(path: PathLike) -> List[LabelRecord]:
    labels = _read_ndjson(path, LabelRecord)
    logger.debug(f"Read {len(labels)} label records from {path}")
    return labels


def write_predictions(predictions: Iterable[PredictionRecord], path: PathLike) -> int:
    return _write_ndjson(predictions, path)


def read_predictions(path: PathLike) -> List[PredictionRecord]:
    return _read_ndjson(path, PredictionRecord)


def predictions_by_frame(records: Iterable[PredictionRecord]) -> Dict[tuple, PredictionRecord]:
    return {(r.sequence_id, r.frame_index): r for r in records}


# --- manifest ---

def validate_manifest(manifest: DatasetManifest, base_dir: Path, check_paths: bool = False) -> None:
    """Referential integrity: unique sequence ids, resolvable configs, known towns, optional path checks"""
    seen = set()
    for entry in manifest.sequences:
        if entry.sequence_id in seen:
            raise DuplicateSequenceError(entry.sequence_id)
        seen.add(entry.sequence_id)

        config_registry.get(entry.config_id)  # raises UnknownConfigError

        if manifest.splits and entry.town_id not in manifest.splits:
            raise MalformedManifestError(
                f"Sequence '{entry.sequence_id}' references town '{entry.town_id}' without a split assignment"
            )
        if check_paths:
            for role, rel in (("frames", entry.frames_path), ("events", entry.events_path),
                              ("labels", entry.labels_path)):
                if rel and not (base_dir / rel).exists():
                    raise MissingPathError(entry.sequence_id, rel, role)


def load_manifest(path: PathLike, check_paths: bool = False) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        manifest = DatasetManifest.model_validate(raw)
    except (json.JSONDecodeError, ValidationError) as e:
        raise MalformedManifestError(f"Malformed manifest {path}: {e}") from e

    validate_manifest(manifest, path.parent, check_paths=check_paths)
    logger.info(f"Loaded manifest {path}: {len(manifest.sequences)} sequences, {len(manifest.splits)} towns")
    return manifest


def save_manifest(manifest: DatasetManifest, path: PathLike) -> None:
    path = Path(path)
    validate_manifest(manifest, path.parent)
    path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Saved manifest {path}: {len(manifest.sequences)} sequences")


def resolve_path(manifest_path: PathLike, relative: str) -> Path:
    return Path(manifest_path).parent / relative
