# Models for sensor configurations, events and intensity frame sequences
from decimal import ROUND_HALF_EVEN, Decimal
from enum import IntEnum
from typing import Iterable, List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000

# One record per event. The reserved byte keeps the in-memory layout identical to EVT1 records.
EVENT_DTYPE = np.dtype(
    [("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "u1"), ("reserved", "u1")]
)


class Polarity(IntEnum):
    NEGATIVE = 0
    POSITIVE = 1


class Event(NamedTuple):
    """A single polarity spike"""
    t: int  # ns
    x: int
    y: int
    polarity: Polarity


def ms_to_ns(value_ms: float) -> int:
    """Exact decimal scaling of a millisecond value to integer nanoseconds"""
    return int((Decimal(repr(float(value_ms))) * NS_PER_MS).to_integral_value(rounding=ROUND_HALF_EVEN))


class SensorConfig(BaseModel):
    """
    One point of the sensor parameter space {th_p, th_n, T_r, F_v}.
    Thresholds are log-intensity steps, the refractory period is in milliseconds
    and the field of view is the horizontal angle in degrees.
    """
    model_config = ConfigDict(frozen=True)

    id: str = "custom"
    th_p: float = Field(gt=0, allow_inf_nan=False)
    th_n: float = Field(gt=0, allow_inf_nan=False)
    refractory_ms: float = Field(ge=0, allow_inf_nan=False)
    fov_deg: float = Field(gt=0, lt=180, allow_inf_nan=False)

    # Registry grouping metadata: which setting this configuration varies
    group: str = "custom"
    varied: Optional[str] = None

    @property
    def refractory_ns(self) -> int:
        return ms_to_ns(self.refractory_ms)

    def parameters(self) -> tuple:
        return (self.th_p, self.th_n, self.refractory_ms, self.fov_deg)

    def describe(self) -> str:
        return (f"{self.id}(th_p={self.th_p}, th_n={self.th_n}, "
                f"T_r={self.refractory_ms}ms, F_v={self.fov_deg}deg)")


class PixelState(BaseModel):
    """Per-pixel transduction state"""
    model_config = ConfigDict(frozen=True)

    l_ref: float = Field(allow_inf_nan=False)
    t_last_emit: Optional[int] = None


class EventStreamStats(BaseModel):
    count: int = 0
    positive: int = 0
    negative: int = 0
    duration_s: float = 0.0
    events_per_second: float = 0.0
    events_per_pixel: float = 0.0


def empty_events(n: int = 0) -> np.ndarray:
    return np.zeros(n, dtype=EVENT_DTYPE)


def canonical_sort(events: np.ndarray) -> np.ndarray:
    """Return events ordered by (t, y, x, polarity)"""
    if len(events) == 0:
        return events
    order = np.lexsort((events["p"], events["x"], events["y"], events["t"]))
    return events[order]


def is_canonical(events: np.ndarray) -> bool:
    """True when consecutive records are nondecreasing in (t, y, x, polarity)"""
    if len(events) < 2:
        return True
    key = (
        events["t"].astype(np.uint64),
        events["y"].astype(np.uint64),
        events["x"].astype(np.uint64),
        events["p"].astype(np.uint64),
    )
    # Compare lexicographically pair by pair, most significant field first
    decided = np.zeros(len(events) - 1, dtype=bool)
    for column in key:
        prev, nxt = column[:-1], column[1:]
        if np.any(~decided & (nxt < prev)):
            return False
        decided |= nxt > prev
    return True


class EventStream(BaseModel):
    """An ordered event stream together with the geometry of the sensor that produced it"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    width: int = Field(gt=0, le=65535)
    height: int = Field(gt=0, le=65535)
    events: np.ndarray = Field(default_factory=empty_events)

    @field_validator("events")
    @classmethod
    def _check_dtype(cls, value: np.ndarray) -> np.ndarray:
        if value.dtype != EVENT_DTYPE:
            raise ValueError(f"events must use EVENT_DTYPE, got {value.dtype}")
        return value

    def __len__(self) -> int:
        return len(self.events)

    @classmethod
    def from_events(cls, events: Iterable[Event], width: int, height: int) -> "EventStream":
        items = list(events)
        arr = empty_events(len(items))
        if items:
            arr["t"] = [e.t for e in items]
            arr["x"] = [e.x for e in items]
            arr["y"] = [e.y for e in items]
            arr["p"] = [int(e.polarity) for e in items]
        return cls(width=width, height=height, events=arr)

    def to_events(self) -> List[Event]:
        return [
            Event(int(r["t"]), int(r["x"]), int(r["y"]), Polarity(int(r["p"])))
            for r in self.events
        ]

    def stats(self) -> EventStreamStats:
        count = len(self.events)
        if count == 0:
            return EventStreamStats()
        positive = int(np.count_nonzero(self.events["p"] == Polarity.POSITIVE))
        duration_s = float(int(self.events["t"][-1]) - int(self.events["t"][0])) / NS_PER_S
        return EventStreamStats(
            count=count,
            positive=positive,
            negative=count - positive,
            duration_s=duration_s,
            events_per_second=count / duration_s if duration_s > 0 else float(count),
            events_per_pixel=count / float(self.width * self.height),
        )


class FrameSequence(BaseModel):
    """
    Grayscale intensity frames with strictly increasing nanosecond timestamps.
    frames has shape (N, H, W) and dtype uint8.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    width: int = Field(default=1280, gt=0, le=65535)
    height: int = Field(default=720, gt=0, le=65535)
    frame_rate: float = Field(default=20.0, gt=0)
    fov_deg: float = Field(default=90.0, gt=0, lt=180)
    timestamps: np.ndarray
    frames: np.ndarray

    @model_validator(mode="after")
    def _check_frames(self) -> "FrameSequence":
        self.timestamps = np.asarray(self.timestamps, dtype=np.uint64)
        self.frames = np.asarray(self.frames)
        if self.frames.dtype != np.uint8:
            raise ValueError(f"frames must be uint8, got {self.frames.dtype}")
        if self.frames.ndim != 3 or self.frames.shape[1:] != (self.height, self.width):
            raise ValueError(
                f"frames must have shape (N, {self.height}, {self.width}), got {self.frames.shape}"
            )
        if self.timestamps.shape != (self.frames.shape[0],):
            raise ValueError("one timestamp is required per frame")
        if len(self.timestamps) > 1 and np.any(np.diff(self.timestamps.astype(np.int64)) <= 0):
            raise ValueError("frame timestamps must be strictly increasing")
        return self

    def __len__(self) -> int:
        return int(self.frames.shape[0])
