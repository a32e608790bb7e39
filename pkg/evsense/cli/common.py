# Shared argument groups and input resolution for the subcommands
import argparse
import logging
from pathlib import Path
from typing import Optional, Tuple

from evsense.exceptions import InvalidParameterError
from evsense.models.run_config import RunConfig
from evsense.models.scene_models import SceneSpec
from evsense.models.sensor_models import SensorConfig
from evsense.services.config_registry import config_registry, explicit_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INVALID = 2

FRAMES_FILE = "frames.frm"
LABELS_FILE = "labels.ndjson"
SCENE_SPEC_FILE = "scene_spec.json"
EVENTS_FILE = "events.evt"
HISTOGRAMS_FILE = "histograms.shr"
PREDICTIONS_FILE = "predictions.ndjson"
METRICS_FILE = "metrics.json"


def global_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="Random seed (default: 0)")
    common.add_argument("--workers", type=int, help="Worker threads (default: 1)")
    common.add_argument("--out", help="Output directory (default: out)")
    common.add_argument("--config-file", dest="config_file",
                        help="JSON file with option values; command-line flags take precedence")
    return common


def add_sensor_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("sensor configuration")
    group.add_argument("--config", dest="config_id", help="Registered configuration id (base, e1..e13)")
    group.add_argument("--th-p", dest="th_p", type=float, help="Positive contrast threshold")
    group.add_argument("--th-n", dest="th_n", type=float, help="Negative contrast threshold")
    group.add_argument("--tr-ms", dest="tr_ms", type=float, help="Refractory period in ms")
    group.add_argument("--fov-deg", dest="fov_deg", type=float, help="Horizontal field of view in degrees")


def add_representation_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("representation")
    group.add_argument("--window-ms", dest="window_ms", type=float, help="Window length in ms (default: 50)")
    group.add_argument("--n-bins", dest="n_bins", type=int, help="Temporal bins per window (default: 10)")
    group.add_argument("--clip", type=int, help="Count saturation value (default: 255)")


def add_detector_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("detector")
    group.add_argument("--density-threshold", dest="density_threshold", type=int,
                       help="Summed event count per pixel for support (default: 1)")
    group.add_argument("--min-area", dest="min_area", type=int, help="Minimum merged component area in px^2 (default: 64)")
    group.add_argument("--dilation-radius", dest="dilation_radius", type=int,
                       help="Dilation radius in px (default: 2)")
    group.add_argument("--merge-gap-ratio", dest="merge_gap_ratio", type=float,
                       help="Join aligned components up to this many shared spans apart, 0 disables (default: 2.5)")


def resolve_sensor_config(run_config: RunConfig) -> SensorConfig:
    """Registered configuration by id, or an explicit one (missing values taken from base)"""
    explicit = run_config.explicit_sensor_values()
    if run_config.config_id and explicit:
        raise InvalidParameterError("use either --config or explicit --th-p/--th-n/--tr-ms/--fov-deg values")
    if run_config.config_id:
        return config_registry.get(run_config.config_id)
    if not explicit:
        return config_registry.get("base")

    base = config_registry.get("base")
    return explicit_config(
        th_p=explicit.get("th_p", base.th_p),
        th_n=explicit.get("th_n", base.th_n),
        refractory_ms=explicit.get("tr_ms", base.refractory_ms),
        fov_deg=explicit.get("fov_deg", base.fov_deg),
    )


def input_file(path: Optional[str], default_name: str, flag: str) -> Path:
    """A required input; a directory resolves to its conventional file name"""
    if not path:
        raise InvalidParameterError(f"{flag} is required")
    resolved = Path(path)
    if resolved.is_dir():
        resolved = resolved / default_name
    if not resolved.exists():
        raise FileNotFoundError(f"{flag}: {resolved} does not exist")
    return resolved


def scene_spec_beside(frames_path: Path) -> Tuple[Optional[Path], Optional[SceneSpec]]:
    path = frames_path.parent / SCENE_SPEC_FILE
    if not path.exists():
        return None, None
    return path, SceneSpec.model_validate_json(path.read_text(encoding="utf-8"))
