# Classical event-density blob detector over stacked histograms
import logging
from typing import List, Optional, Sequence, Tuple

import cv2
import numpy as np

from evsense.models.dataset_models import VEHICLE_CLASS_ID, BBox
from evsense.models.detection_models import Detection, DetectorParams
from evsense.models.representation_models import StackedHistogram

logger = logging.getLogger(__name__)

# (x0, y0, x1, y1), exclusive upper bounds
Extent = Tuple[int, int, int, int]


def density_map(hist: StackedHistogram) -> np.ndarray:
    """Per-pixel event count summed over all channels"""
    return hist.data.sum(axis=0, dtype=np.int64)


def aligned_within_gap(a: Extent, b: Extent, gap_ratio: float) -> bool:
    """
    True when the extents share at least half of the shorter one along an axis and
    lie no further apart along the other axis than gap_ratio times that shared span.
    """
    for axis in (0, 1):
        other = 1 - axis
        overlap = min(a[axis + 2], b[axis + 2]) - max(a[axis], b[axis])
        shorter = min(a[axis + 2] - a[axis], b[axis + 2] - b[axis])
        if overlap <= 0 or 2 * overlap < shorter:
            continue
        gap = max(a[other], b[other]) - min(a[other + 2], b[other + 2])
        if gap <= gap_ratio * overlap:
            return True
    return False


def merge_extents(extents: Sequence[Extent], gap_ratio: float) -> List[List[int]]:
    """
    Group extents by repeatedly joining aligned neighbours; a joined group is
    represented by the union of its extents. Returns member indices per group.
    """
    groups = [[k] for k in range(len(extents))]
    spans = [tuple(int(v) for v in e) for e in extents]
    merged = True
    while merged:
        merged = False
        i = 0
        while i < len(groups):
            j = i + 1
            while j < len(groups):
                if aligned_within_gap(spans[i], spans[j], gap_ratio):
                    a, b = spans[i], spans.pop(j)
                    spans[i] = (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))
                    groups[i].extend(groups.pop(j))
                    merged = True
                else:
                    j += 1
            i += 1
    return groups


class BlobDetector:
    """
    Binarize the density map, dilate to merge nearby fragments, extract 8-connected
    components and join components aligned along a row or column (the leading and
    trailing edges of a moving object). Boxes are tight to the supporting
    (above-threshold) pixels; the score is their mean density over twice the
    threshold, capped at 1.
    """

    def __init__(self, params: Optional[DetectorParams] = None):
        self.params = params or DetectorParams()
        logger.info(f"Initialized blob detector with threshold={self.params.density_threshold}, "
                    f"min_area={self.params.min_area}, dilation={self.params.dilation_radius}, "
                    f"merge_gap_ratio={self.params.merge_gap_ratio}")

    def detect(self, hist: StackedHistogram, params: Optional[DetectorParams] = None) -> List[Detection]:
        params = params or self.params
        density = density_map(hist)
        support = density >= params.density_threshold
        if not support.any():
            return []

        mask = support.astype(np.uint8)
        if params.dilation_radius > 0:
            size = 2 * params.dilation_radius + 1
            kernel = cv2.getStructuringElement(cv2.MORPH_RECT, (size, size))
            mask = cv2.dilate(mask, kernel)

        num_labels, labels, stats, _ = cv2.connectedComponentsWithStats(mask, connectivity=8)

        extents = [
            (int(s[cv2.CC_STAT_LEFT]), int(s[cv2.CC_STAT_TOP]),
             int(s[cv2.CC_STAT_LEFT] + s[cv2.CC_STAT_WIDTH]), int(s[cv2.CC_STAT_TOP] + s[cv2.CC_STAT_HEIGHT]))
            for s in stats[1:]
        ]
        if params.merge_gap_ratio > 0:
            groups = merge_extents(extents, params.merge_gap_ratio)
        else:
            groups = [[k] for k in range(len(extents))]

        detections = []
        for group in groups:
            component_ids = [k + 1 for k in group]
            if int(stats[component_ids, cv2.CC_STAT_AREA].sum()) < params.min_area:
                continue
            members = np.isin(labels, component_ids) & support
            rows = np.flatnonzero(members.any(axis=1))
            cols = np.flatnonzero(members.any(axis=0))
            mean_density = float(density[members].mean())
            score = min(1.0, mean_density / (2.0 * params.density_threshold))
            box = BBox(
                x=float(cols[0]),
                y=float(rows[0]),
                w=float(cols[-1] - cols[0] + 1),
                h=float(rows[-1] - rows[0] + 1),
                class_id=VEHICLE_CLASS_ID,
            )
            detections.append(Detection(box=box, score=score))

        detections.sort(key=lambda d: (-d.score, d.box.y, d.box.x))
        logger.debug(f"Detected {len(detections)} blobs from {num_labels - 1} components in {len(groups)} groups")
        return detections


# Global detector instance
blob_detector = BlobDetector()


def detect(hist: StackedHistogram, params: Optional[DetectorParams] = None) -> List[Detection]:
    return blob_detector.detect(hist, params)
