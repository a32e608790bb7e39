# Binary containers: EVT1 event streams, FRM1 frame sequences, SHR1 histograms
import contextlib
import logging
import os
import struct
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Union

import numpy as np
from pydantic import ValidationError

from evsense.exceptions import (
    BadMagicError,
    BoundsError,
    InvalidHeaderError,
    OrderError,
    SerializationError,
    TruncatedError,
    UnsupportedVersionError,
)
from evsense.models.representation_models import RepresentationSpec, StackedHistogram
from evsense.models.sensor_models import (
    EVENT_DTYPE,
    NS_PER_S,
    EventStream,
    FrameSequence,
    is_canonical,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

EVT_MAGIC = b"EVT1"
EVT_HEADER = struct.Struct("<4sHHHQ")  # magic, version, width, height, count
EVT_RECORD_SIZE = EVENT_DTYPE.itemsize  # 14: t u64, x u16, y u16, polarity u8, reserved u8

FRM_MAGIC = b"FRM1"
FRM_HEADER = struct.Struct("<4sHHHI")  # magic, version, width, height, frame_count
FRM_TIMESTAMP = struct.Struct("<Q")

SHR_MAGIC = b"SHR1"
SHR_HEADER = struct.Struct("<4sHHHHQQ")  # magic, version, channels, height, width, window_start, window_len

DEFAULT_CHUNK_RECORDS = 1 << 16

Source = Union[str, os.PathLike, BinaryIO]


@contextlib.contextmanager
def _opened(target: Source, mode: str):
    if isinstance(target, (str, os.PathLike)):
        with open(Path(target), mode) as handle:
            yield handle
    else:
        yield target


def _read_exact(handle: BinaryIO, size: int, offset: int, what: str) -> bytes:
    data = handle.read(size)
    if len(data) < size:
        raise TruncatedError(f"truncated {what}: expected {size} bytes, got {len(data)}", offset + len(data))
    return data


@contextlib.contextmanager
def _header_fields(what: str):
    try:
        yield
    except ValidationError as e:
        raise InvalidHeaderError(f"invalid {what} header: {e.errors()[0]['msg']}") from e


def _check_magic(magic: bytes, expected: bytes, version: int) -> None:
    if magic != expected:
        raise BadMagicError(f"bad magic {magic!r}, expected {expected!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{expected.decode()} version {version} is not supported")


def _validate_events(events: np.ndarray, width: int, height: int, reading: bool = False) -> None:
    """Reject out-of-range coordinates or polarities and non-canonical order"""
    if len(events) == 0:
        return
    if np.any(events["x"] >= width) or np.any(events["y"] >= height):
        message = f"event coordinates outside {width}x{height} geometry"
        raise BoundsError(message) if reading else SerializationError(message)
    if np.any(events["p"] > 1):
        message = "polarity must be 0 (negative) or 1 (positive)"
        raise BoundsError(message) if reading else SerializationError(message)
    if not is_canonical(events):
        message = "events are not in canonical (t, y, x, polarity) order"
        raise OrderError(message) if reading else SerializationError(message)


# --- EVT1 ---

def write_events(stream: EventStream, sink: Source) -> int:
    """Write an EVT1 container and return the number of bytes written"""
    _validate_events(stream.events, stream.width, stream.height)
    records = stream.events.copy()
    records["reserved"] = 0
    with _opened(sink, "wb") as handle:
        handle.write(EVT_HEADER.pack(EVT_MAGIC, FORMAT_VERSION, stream.width, stream.height, len(records)))
        handle.write(records.tobytes())
    size = EVT_HEADER.size + len(records) * EVT_RECORD_SIZE
    logger.debug(f"Wrote {len(records)} events ({size} bytes)")
    return size


def read_events(source: Source) -> EventStream:
    with EventReader(source) as reader:
        chunks = list(reader.iter_chunks())
    events = np.concatenate(chunks) if chunks else np.zeros(0, dtype=EVENT_DTYPE)
    with _header_fields("EVT1"):
        return EventStream(width=reader.width, height=reader.height, events=events)


class EventReader:
    """
    Streaming EVT1 reader. Records are returned in chunks and validated across
    chunk boundaries; reading stops at the declared count.
    """

    def __init__(self, source: Source, chunk_records: int = DEFAULT_CHUNK_RECORDS):
        self._source = source
        self._stack = contextlib.ExitStack()
        self.chunk_records = max(1, int(chunk_records))
        self.width = 0
        self.height = 0
        self.count = 0

    def __enter__(self) -> "EventReader":
        self._handle = self._stack.enter_context(_opened(self._source, "rb"))
        try:
            header = _read_exact(self._handle, EVT_HEADER.size, 0, "EVT1 header")
            magic, version, self.width, self.height, self.count = EVT_HEADER.unpack(header)
            _check_magic(magic, EVT_MAGIC, version)
        except Exception:
            self._stack.close()
            raise
        return self

    def __exit__(self, *exc) -> None:
        self._stack.close()

    def iter_chunks(self) -> Iterator[np.ndarray]:
        remaining = self.count
        offset = EVT_HEADER.size
        previous: Optional[np.ndarray] = None
        while remaining > 0:
            n = min(remaining, self.chunk_records)
            data = self._handle.read(n * EVT_RECORD_SIZE)
            if len(data) < n * EVT_RECORD_SIZE:
                complete = len(data) // EVT_RECORD_SIZE
                raise TruncatedError(
                    f"truncated EVT1 record {self.count - remaining + complete}",
                    offset + complete * EVT_RECORD_SIZE,
                )
            chunk = np.frombuffer(data, dtype=EVENT_DTYPE).copy()
            check = chunk if previous is None else np.concatenate([previous[-1:], chunk])
            _validate_events(check, self.width, self.height, reading=True)
            previous = chunk
            offset += len(data)
            remaining -= n
            yield chunk


class EventWriter:
    """Streaming EVT1 writer; the record count is patched into the header on close"""

    def __init__(self, sink: Union[str, os.PathLike], width: int, height: int):
        self.path = Path(sink)
        self.width = width
        self.height = height
        self.count = 0
        self._last: Optional[np.ndarray] = None
        self._handle: Optional[BinaryIO] = None

    def __enter__(self) -> "EventWriter":
        self._handle = open(self.path, "wb")
        self._handle.write(EVT_HEADER.pack(EVT_MAGIC, FORMAT_VERSION, self.width, self.height, 0))
        return self

    def append(self, events: np.ndarray) -> None:
        if len(events) == 0:
            return
        check = events if self._last is None else np.concatenate([self._last, events])
        _validate_events(check, self.width, self.height)
        records = events.copy()
        records["reserved"] = 0
        self._handle.write(records.tobytes())
        self._last = events[-1:].copy()
        self.count += len(events)

    def __exit__(self, exc_type, *exc) -> None:
        try:
            if exc_type is None:
                self._handle.seek(0)
                self._handle.write(EVT_HEADER.pack(EVT_MAGIC, FORMAT_VERSION, self.width, self.height, self.count))
        finally:
            self._handle.close()


# --- FRM1 ---

def write_frames(seq: FrameSequence, sink: Source) -> int:
    if len(seq.timestamps) > 1 and np.any(np.diff(seq.timestamps.astype(np.int64)) <= 0):
        raise SerializationError("frame timestamps must be strictly increasing")
    size = FRM_HEADER.size
    with _opened(sink, "wb") as handle:
        handle.write(FRM_HEADER.pack(FRM_MAGIC, FORMAT_VERSION, seq.width, seq.height, len(seq)))
        for t, frame in zip(seq.timestamps, seq.frames):
            handle.write(FRM_TIMESTAMP.pack(int(t)))
            handle.write(np.ascontiguousarray(frame, dtype=np.uint8).tobytes())
            size += FRM_TIMESTAMP.size + frame.size
    logger.debug(f"Wrote {len(seq)} frames ({size} bytes)")
    return size


def read_frames(source: Source, fov_deg: float = 90.0) -> FrameSequence:
    """Read a FRM1 container. The frame rate is recovered from the first timestamp gap."""
    with _opened(source, "rb") as handle:
        header = _read_exact(handle, FRM_HEADER.size, 0, "FRM1 header")
        magic, version, width, height, frame_count = FRM_HEADER.unpack(header)
        _check_magic(magic, FRM_MAGIC, version)

        frame_bytes = width * height
        offset = FRM_HEADER.size
        timestamps = np.zeros(frame_count, dtype=np.uint64)
        frames = np.zeros((frame_count, height, width), dtype=np.uint8)
        for k in range(frame_count):
            t = FRM_TIMESTAMP.unpack(_read_exact(handle, FRM_TIMESTAMP.size, offset, f"FRM1 frame {k} timestamp"))[0]
            offset += FRM_TIMESTAMP.size
            if k > 0 and t <= int(timestamps[k - 1]):
                raise OrderError(f"FRM1 frame {k} timestamp {t} does not increase")
            timestamps[k] = t
            data = _read_exact(handle, frame_bytes, offset, f"FRM1 frame {k}")
            frames[k] = np.frombuffer(data, dtype=np.uint8).reshape(height, width)
            offset += frame_bytes

    frame_rate = NS_PER_S / float(timestamps[1] - timestamps[0]) if frame_count > 1 else 20.0
    with _header_fields("FRM1"):
        return FrameSequence(width=width, height=height, frame_rate=frame_rate, fov_deg=fov_deg,
                             timestamps=timestamps, frames=frames)


# --- SHR1 ---

def write_histogram(hist: StackedHistogram, sink: BinaryIO) -> int:
    """Append one SHR1 record to an open binary sink"""
    spec = hist.spec
    sink.write(SHR_HEADER.pack(SHR_MAGIC, FORMAT_VERSION, spec.channels, spec.height, spec.width,
                               hist.window_start, spec.window_len_ns))
    sink.write(np.ascontiguousarray(hist.data).tobytes())
    return SHR_HEADER.size + hist.data.size


def write_histograms(histograms, sink: Source) -> int:
    size = 0
    with _opened(sink, "wb") as handle:
        for hist in histograms:
            size += write_histogram(hist, handle)
    return size


def _read_histogram(handle: BinaryIO, offset: int, clip: int) -> Optional[StackedHistogram]:
    header = handle.read(SHR_HEADER.size)
    if not header:
        return None
    if len(header) < SHR_HEADER.size:
        raise TruncatedError("truncated SHR1 header", offset + len(header))
    magic, version, channels, height, width, window_start, window_len = SHR_HEADER.unpack(header)
    _check_magic(magic, SHR_MAGIC, version)
    if channels % 2 != 0 or channels == 0:
        raise SerializationError(f"SHR1 channel count {channels} is not a positive even number")
    with _header_fields("SHR1"):
        spec = RepresentationSpec(width=width, height=height, window_len_ns=window_len,
                                  n_bins=channels // 2, clip=clip)
    data = _read_exact(handle, channels * height * width, offset + SHR_HEADER.size, "SHR1 payload")
    return StackedHistogram(
        spec=spec,
        window_start=window_start,
        data=np.frombuffer(data, dtype=np.uint8).reshape(channels, height, width).copy(),
    )


def read_histograms(source: Source, clip: int = 255) -> Iterator[StackedHistogram]:
    """Iterate over the SHR1 records of a file until EOF"""
    with _opened(source, "rb") as handle:
        offset = 0
        while True:
            hist = _read_histogram(handle, offset, clip)
            if hist is None:
                return
            offset += SHR_HEADER.size + hist.data.size
            yield hist


def read_histogram(source: Source, clip: int = 255) -> StackedHistogram:
    with _opened(source, "rb") as handle:
        hist = _read_histogram(handle, 0, clip)
    if hist is None:
        raise TruncatedError("empty SHR1 input", 0)
    return hist
