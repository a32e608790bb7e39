# Stacked histogram representation: per-window, per-polarity, per-bin saturating counts
import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from evsense.exceptions import InvalidParameterError, RejectedInputError
from evsense.models.dataset_models import LabelRecord
from evsense.models.representation_models import RepresentationSpec, StackedHistogram, WindowPlan
from evsense.models.sensor_models import EventStream

logger = logging.getLogger(__name__)


def bin_index(t: int, window_start: int, spec: RepresentationSpec) -> Optional[int]:
    """Temporal bin of a timestamp inside the half-open window, or None outside it"""
    offset = int(t) - int(window_start)
    if offset < 0 or offset >= spec.window_len_ns:
        return None
    return offset // spec.bin_width_ns


class RepresentationService:

    def build_stacked_histogram(self, events: np.ndarray, window_start: int,
                                spec: RepresentationSpec) -> StackedHistogram:
        """
        Accumulate the in-window events of a canonical-ordered record array.
        Counts saturate at spec.clip; events outside [start, start + len) are ignored.
        """
        if len(events) and (np.any(events["x"] >= spec.width) or np.any(events["y"] >= spec.height)):
            raise RejectedInputError(f"event coordinates outside {spec.width}x{spec.height}")

        counts = np.zeros(spec.channels * spec.height * spec.width, dtype=np.int64)
        if len(events):
            t = events["t"].astype(np.int64)
            window = events[(t >= window_start) & (t < window_start + spec.window_len_ns)]
            if len(window):
                bins = (window["t"].astype(np.int64) - window_start) // spec.bin_width_ns
                channel = window["p"].astype(np.int64) * spec.n_bins + bins
                flat = (channel * spec.height + window["y"].astype(np.int64)) * spec.width \
                    + window["x"].astype(np.int64)
                np.add.at(counts, flat, 1)

        data = np.minimum(counts, spec.clip).astype(np.uint8).reshape(spec.shape)
        return StackedHistogram(spec=spec, window_start=int(window_start), data=data)

    def windows_for_sequence(self, label_timestamps: Sequence[int], spec: RepresentationSpec) -> WindowPlan:
        """
        One window per label timestamp, ending at it.
        Timestamps without a full window of history behind them are skipped with a warning.
        """
        stamps = [int(t) for t in label_timestamps]
        if any(b <= a for a, b in zip(stamps, stamps[1:])):
            raise InvalidParameterError("label timestamps must be strictly increasing")

        plan = WindowPlan()
        skipped = sum(1 for t in stamps if t < spec.window_len_ns)
        if skipped:
            stamps = stamps[skipped:]
            plan.skipped = skipped
            plan.warnings.append(f"skipped {skipped} label frames earlier than one {spec.window_len_ns}ns window")
            logger.warning(plan.warnings[-1])

        plan.windows = [(t - spec.window_len_ns, spec.window_len_ns) for t in stamps]
        spacing = [b - a for a, b in zip(stamps, stamps[1:])]
        if spacing and min(spacing) < spec.window_len_ns:
            plan.overlap_warning = True
            plan.warnings.append(
                f"label spacing {min(spacing)}ns is shorter than the {spec.window_len_ns}ns window; windows overlap"
            )
            logger.warning(plan.warnings[-1])
        return plan

    def plan_for_labels(self, labels: Sequence[LabelRecord],
                        spec: RepresentationSpec) -> Tuple[WindowPlan, List[int]]:
        """
        Windows for the label frames that have a full window of history behind them.
        Returns the plan and the frame index of each window; earlier frames are skipped.
        """
        plan = self.windows_for_sequence([r.t_ns for r in labels], spec)
        return plan, [r.frame_index for r in labels[plan.skipped:]]

    def iter_window_histograms(self, stream: EventStream, plan: WindowPlan,
                               spec: RepresentationSpec) -> Iterator[StackedHistogram]:
        # The stream is canonical, so each window is a contiguous slice
        t = stream.events["t"].astype(np.int64)
        for start, length in plan.windows:
            lo, hi = np.searchsorted(t, [start, start + length], side="left")
            yield self.build_stacked_histogram(stream.events[lo:hi], start, spec)

    def build_window_histograms(self, stream: EventStream, plan: WindowPlan,
                                spec: RepresentationSpec) -> List[StackedHistogram]:
        histograms = list(self.iter_window_histograms(stream, plan, spec))
        logger.debug(f"Built {len(histograms)} stacked histograms")
        return histograms


# Global service instance
representation_service = RepresentationService()


def build_stacked_histogram(events: np.ndarray, window_start: int, spec: RepresentationSpec) -> StackedHistogram:
    return representation_service.build_stacked_histogram(events, window_start, spec)


def windows_for_sequence(label_timestamps: Sequence[int], spec: RepresentationSpec) -> WindowPlan:
    return representation_service.windows_for_sequence(label_timestamps, spec)
