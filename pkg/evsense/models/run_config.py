# Resolved command options: defaults <- JSON config file <- command-line flags
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from evsense.exceptions import MalformedDocumentError
from evsense.models.detection_models import DetectorParams
from evsense.models.representation_models import DEFAULT_BINS, DEFAULT_CLIP, RepresentationSpec
from evsense.models.sensor_models import ms_to_ns

logger = logging.getLogger(__name__)

RUN_CONFIG_FILE = "run_config.json"


class RunConfig(BaseModel):
    """Options of one CLI invocation"""
    command: str = ""
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    out: str = "out"

    # Inputs
    spec: Optional[str] = None
    frames: Optional[str] = None
    events: Optional[str] = None
    labels: Optional[str] = None
    histograms: Optional[str] = None
    predictions: Optional[str] = None
    metrics: Optional[str] = None
    scenes: List[str] = []
    manifest: Optional[str] = None
    split: Optional[str] = None
    sequence_id: Optional[str] = None

    # Sensor selection
    partition: Optional[str] = None
    config_id: Optional[str] = None
    th_p: Optional[float] = None
    th_n: Optional[float] = None
    tr_ms: Optional[float] = None
    fov_deg: Optional[float] = None

    # Random scene generation
    random_scene: bool = False
    n_frames: int = Field(default=20, ge=1)
    width: int = Field(default=320, gt=0)
    height: int = Field(default=240, gt=0)
    max_objects: int = Field(default=3, ge=1)

    # Representation and detection
    window_ms: float = Field(default=50.0, gt=0)
    n_bins: int = Field(default=DEFAULT_BINS, ge=1)
    clip: int = Field(default=DEFAULT_CLIP, ge=1, le=255)
    detector: DetectorParams = DetectorParams()
    filter_labels: bool = True

    # Reporting
    published: Optional[str] = None

    def representation_spec(self, width: int, height: int) -> RepresentationSpec:
        return RepresentationSpec(
            width=width,
            height=height,
            window_len_ns=ms_to_ns(self.window_ms),
            n_bins=self.n_bins,
            clip=self.clip,
        )

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def explicit_sensor_values(self) -> Dict[str, float]:
        values = {"th_p": self.th_p, "th_n": self.th_n, "tr_ms": self.tr_ms, "fov_deg": self.fov_deg}
        return {k: v for k, v in values.items() if v is not None}

    @classmethod
    def resolve(cls, command: str, config_file: Optional[str] = None,
                overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        data: Dict[str, Any] = {}
        if config_file:
            path = Path(config_file)
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as e:
                raise MalformedDocumentError(f"Config file {path} is not valid JSON: {e}") from e
            if not isinstance(data, dict):
                raise MalformedDocumentError(f"Config file {path} must hold a JSON object")
            logger.info(f"Loaded run options from {path}")

        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key == "detector":
                data["detector"] = {**data.get("detector", {}), **value}
            else:
                data[key] = value
        data["command"] = command
        return cls.model_validate(data)

    def save(self, out_dir: Optional[Path] = None) -> Path:
        """Echo the resolved options next to the outputs"""
        target = Path(out_dir or self.out_dir)
        target.mkdir(parents=True, exist_ok=True)
        path = target / RUN_CONFIG_FILE
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path
