# Models for the stacked histogram representation
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_WINDOW_NS = 50_000_000
DEFAULT_BINS = 10
DEFAULT_CLIP = 255


class RepresentationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int = Field(gt=0, le=65535)
    height: int = Field(gt=0, le=65535)
    window_len_ns: int = Field(default=DEFAULT_WINDOW_NS, gt=0)
    n_bins: int = Field(default=DEFAULT_BINS, ge=1)
    clip: int = Field(default=DEFAULT_CLIP, ge=1, le=255)

    @model_validator(mode="after")
    def _equal_bins(self) -> "RepresentationSpec":
        if self.window_len_ns % self.n_bins != 0:
            raise ValueError(
                f"window_len_ns={self.window_len_ns} is not divisible by n_bins={self.n_bins}"
            )
        if 2 * self.n_bins > 65535:
            raise ValueError("channel count does not fit the histogram container")
        return self

    @property
    def bin_width_ns(self) -> int:
        return self.window_len_ns // self.n_bins

    @property
    def channels(self) -> int:
        return 2 * self.n_bins

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.channels, self.height, self.width)


class StackedHistogram(BaseModel):
    """
    Saturating event counts for one temporal window.
    Channels 0..n_bins-1 hold negative events, n_bins..2*n_bins-1 positive events.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: RepresentationSpec
    window_start: int = Field(ge=0)
    data: np.ndarray

    @model_validator(mode="after")
    def _check_data(self) -> "StackedHistogram":
        if self.data.dtype != np.uint8:
            raise ValueError(f"histogram data must be uint8, got {self.data.dtype}")
        if self.data.shape != self.spec.shape:
            raise ValueError(f"histogram data shape {self.data.shape} != {self.spec.shape}")
        return self

    @property
    def window_end(self) -> int:
        return self.window_start + self.spec.window_len_ns


class WindowPlan(BaseModel):
    """Label-aligned windows for one sequence"""
    windows: List[Tuple[int, int]] = []  # (window_start_ns, window_len_ns)
    overlap_warning: bool = False
    skipped: int = 0  # label timestamps with less than one window of history
    warnings: List[str] = []
