# DVS transduction: intensity frames -> polarity events
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from evsense.exceptions import InsufficientInputError, InvalidParameterError, RejectedInputError
from evsense.models.sensor_models import (
    EVENT_DTYPE,
    Event,
    EventStream,
    FrameSequence,
    PixelState,
    Polarity,
    SensorConfig,
    canonical_sort,
    empty_events,
)

logger = logging.getLogger(__name__)

LOG_EPS = 1e-3

# ln(i/255 + eps) for every 8-bit sample, shared by the scalar and array paths
LOG_LUT = np.log(np.arange(256, dtype=np.float64) / 255.0 + LOG_EPS)


def log_intensity(sample: int) -> float:
    """Log intensity of an 8-bit grayscale sample"""
    i = int(sample)
    if i < 0 or i > 255:
        raise InvalidParameterError(f"8-bit sample out of range: {sample}")
    return float(LOG_LUT[i])


def log_frame(frame: np.ndarray) -> np.ndarray:
    return LOG_LUT[frame]


def transduce_pixel_interval(
    state: PixelState,
    l_new: float,
    t0: int,
    t1: int,
    config: SensorConfig,
    x: int = 0,
    y: int = 0,
) -> Tuple[PixelState, List[Event]]:
    """
    Emit the threshold crossings of one pixel between two frame timestamps.

    Crossing i of n = floor(|dL| / th) lands at t0 + (i*th/|dL|) * (t1 - t0).
    Crossings inside the refractory period of the previous emission are dropped and
    leave L_ref where it was, so the pending change is reported later.
    """
    if not math.isfinite(l_new):
        raise RejectedInputError(f"non-finite log intensity {l_new!r} at pixel ({x}, {y})")
    if t0 >= t1:
        raise InvalidParameterError(f"interval must satisfy t0 < t1, got [{t0}, {t1}]")

    delta = l_new - state.l_ref
    if delta > 0:
        th, sign, polarity = config.th_p, 1.0, Polarity.POSITIVE
    elif delta < 0:
        th, sign, polarity = config.th_n, -1.0, Polarity.NEGATIVE
    else:
        return state, []

    abs_delta = abs(delta)
    n_raw = int(math.floor(abs_delta / th))
    span = t1 - t0
    refractory_ns = config.refractory_ns

    t_last = state.t_last_emit
    last_emitted = 0
    events: List[Event] = []
    for i in range(1, n_raw + 1):
        t = t0 + int(math.floor((i * th) / abs_delta * span))
        if t_last is None or t - t_last >= refractory_ns:
            events.append(Event(t=t, x=x, y=y, polarity=polarity))
            t_last = t
            last_emitted = i

    if last_emitted == 0:
        return state, events
    updated = PixelState(l_ref=state.l_ref + sign * (last_emitted * th), t_last_emit=t_last)
    return updated, events


class TransductionService:
    """
    Vectorized transduction over whole frames.
    Pixels are independent, so row bands can run on separate workers; the merged
    stream is put in canonical order and is identical for any worker count.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))

    def transduce_sequence(self, seq: FrameSequence, config: SensorConfig,
                           workers: Optional[int] = None) -> EventStream:
        if len(seq) < 2:
            raise InsufficientInputError(f"transduction needs at least 2 frames, got {len(seq)}")

        n_workers = max(1, int(workers or self.workers))
        bands = _row_bands(seq.height, n_workers)
        logger.info(f"Transducing {len(seq)} frames ({seq.width}x{seq.height}) with {config.describe()} "
                    f"on {len(bands)} band(s)")

        if len(bands) == 1:
            chunks = [self._transduce_band(seq, config, 0, seq.height)]
        else:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                chunks = list(pool.map(lambda band: self._transduce_band(seq, config, *band), bands))

        events = np.concatenate(chunks) if chunks else empty_events()
        stream = EventStream(width=seq.width, height=seq.height, events=canonical_sort(events))
        logger.info(f"Transduction produced {len(stream)} events")
        return stream

    def _transduce_band(self, seq: FrameSequence, config: SensorConfig, row0: int, row1: int) -> np.ndarray:
        width = seq.width
        l_ref = log_frame(seq.frames[0, row0:row1]).ravel().copy()
        t_last = np.full(l_ref.shape, -1, dtype=np.int64)  # -1: no emission yet
        refractory_ns = config.refractory_ns

        chunks: List[np.ndarray] = []
        for k in range(1, len(seq)):
            t0 = int(seq.timestamps[k - 1])
            t1 = int(seq.timestamps[k])
            span = t1 - t0
            l_new = log_frame(seq.frames[k, row0:row1]).ravel()

            delta = l_new - l_ref
            active = np.flatnonzero(delta != 0)
            if active.size == 0:
                continue

            d = delta[active]
            positive = d > 0
            th = np.where(positive, config.th_p, config.th_n)
            abs_delta = np.abs(d)
            n_raw = np.floor(abs_delta / th).astype(np.int64)

            keep = n_raw > 0
            if not np.any(keep):
                continue
            idx, positive, th, abs_delta, n_raw = (
                active[keep], positive[keep], th[keep], abs_delta[keep], n_raw[keep]
            )
            last = t_last[idx]
            last_emitted = np.zeros(idx.shape, dtype=np.int64)

            for i in range(1, int(n_raw.max()) + 1):
                candidate = n_raw >= i
                t = t0 + np.floor((i * th) / abs_delta * span).astype(np.int64)
                emit = candidate & ((last < 0) | (t - last >= refractory_ns))
                if not np.any(emit):
                    continue
                last = np.where(emit, t, last)
                last_emitted = np.where(emit, i, last_emitted)

                pix = idx[emit]
                batch = empty_events(pix.size)
                batch["t"] = t[emit].astype(np.uint64)
                batch["x"] = (pix % width).astype(np.uint16)
                batch["y"] = (pix // width + row0).astype(np.uint16)
                batch["p"] = positive[emit].astype(np.uint8)
                chunks.append(batch)

            moved = last_emitted > 0
            if np.any(moved):
                sign = np.where(positive[moved], 1.0, -1.0)
                l_ref[idx[moved]] = l_ref[idx[moved]] + sign * (last_emitted[moved] * th[moved])
                t_last[idx[moved]] = last[moved]

        if not chunks:
            return empty_events()
        return np.concatenate(chunks).astype(EVENT_DTYPE, copy=False)


def _row_bands(height: int, workers: int) -> List[Tuple[int, int]]:
    n = max(1, min(workers, height))
    edges = np.linspace(0, height, n + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


# Global service instance
transduction_service = TransductionService()


def transduce_sequence(seq: FrameSequence, config: SensorConfig, workers: int = 1) -> EventStream:
    return transduction_service.transduce_sequence(seq, config, workers=workers)
