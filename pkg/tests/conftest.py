import logging
from pathlib import Path
from typing import List

import numpy as np
import pytest

from tests.helpers import moving_car_spec, write_scene


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def scene_dirs(tmp_path) -> List[Path]:
    return [write_scene(tmp_path / "scenes" / f"s{seed}", moving_car_spec(seed=seed)) for seed in (1, 2)]


@pytest.fixture
def empty_scene_dir(tmp_path) -> Path:
    return write_scene(tmp_path / "scenes" / "empty", moving_car_spec(objects=False))


@pytest.fixture(autouse=True)
def _restore_evsense_logger_level():
    """Keep logger levels set by one test (e.g. configure_logging) from leaking into the next"""
    evsense_logger = logging.getLogger("evsense")
    level = evsense_logger.level
    yield
    evsense_logger.setLevel(level)
