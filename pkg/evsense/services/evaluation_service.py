# COCO-style detection metrics and per-test-set score aggregation
import logging
import math
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from evsense.exceptions import IncompleteInputError, InvalidParameterError
from evsense.models.dataset_models import BBox, Partition
from evsense.models.detection_models import Detection
from evsense.models.evaluation_models import (
    METRIC_IDS,
    MatchResult,
    MetricId,
    MetricSummary,
    MetricValues,
    ScoreReport,
)

logger = logging.getLogger(__name__)

# Rounded so that 0.6 is exactly the literal 0.6
IOU_THRESHOLDS = np.round(0.5 + 0.05 * np.arange(10), 2)
RECALL_GRID = np.linspace(0.0, 1.0, 101)

# Effective side sqrt(w*h) bands, exclusive bounds
SIZE_BANDS: Dict[str, Tuple[float, float]] = {
    "all": (0.0, math.inf),
    "medium": (32.0, 96.0),
    "large": (96.0, math.inf),
}

# Per-configuration AP (%) of the published comparison: detector family / training regime -> config -> AP
PUBLISHED_AP: Dict[str, Dict[str, float]] = {
    "RVT-B/base": {
        "base": 45.63, "e1": 44.49, "e3": 23.74, "e4": 45.13, "e6": 44.61, "e7": 31.49, "e9": 7.32,
        "e2": 35.69, "e5": 45.56, "e8": 31.21, "e10": 33.92, "e11": 34.22, "e12": 34.08, "e13": 27.09,
    },
    "RVT-B/train": {
        "base": 44.12, "e1": 45.94, "e3": 30.23, "e4": 44.72, "e6": 44.13, "e7": 35.61, "e9": 17.10,
        "e2": 37.69, "e5": 44.48, "e8": 35.95, "e10": 40.00, "e11": 37.70, "e12": 37.30, "e13": 31.03,
    },
    "SSMS-B/base": {
        "base": 49.10, "e1": 51.99, "e3": 26.72, "e4": 48.97, "e6": 48.73, "e7": 34.68, "e9": 7.08,
        "e2": 38.69, "e5": 48.97, "e8": 32.09, "e10": 40.68, "e11": 40.54, "e12": 35.79, "e13": 30.88,
    },
    "SSMS-B/train": {
        "base": 50.58, "e1": 53.90, "e3": 33.01, "e4": 50.55, "e6": 50.05, "e7": 41.31, "e9": 17.58,
        "e2": 42.03, "e5": 50.98, "e8": 41.27, "e10": 48.14, "e11": 43.13, "e12": 40.86, "e13": 37.26,
    },
}


def iou(a: BBox, b: BBox) -> float:
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def _in_band(box: BBox, band: Tuple[float, float]) -> bool:
    lo, hi = band
    return lo < box.effective_side < hi if hi != math.inf else box.effective_side > lo


def match_greedy(
    preds: Sequence[Detection],
    gts: Sequence[BBox],
    iou_thr: float,
    gt_ignore: Optional[Sequence[bool]] = None,
    pred_out_of_band: Optional[Sequence[bool]] = None,
) -> MatchResult:
    """
    One-to-one matching of score-sorted predictions against ground truth.
    Each prediction takes the unmatched gt of highest IoU (ties: lowest index) if that IoU
    reaches iou_thr. Counted gts are preferred over ignored ones; a prediction matched to an
    ignored gt, or unmatched and outside the size band, is ignored rather than a false positive.
    """
    gt_ignore = list(gt_ignore) if gt_ignore is not None else [False] * len(gts)
    pred_out_of_band = list(pred_out_of_band) if pred_out_of_band is not None else [False] * len(preds)

    counted = [j for j in range(len(gts)) if not gt_ignore[j]]
    ignored = [j for j in range(len(gts)) if gt_ignore[j]]
    result = MatchResult(gt_matched=[False] * len(gts))

    for i, pred in enumerate(preds):
        best, best_iou = None, -1.0
        for group in (counted, ignored):
            for j in group:
                if result.gt_matched[j]:
                    continue
                overlap = iou(pred.box, gts[j])
                if overlap >= iou_thr and overlap > best_iou:
                    best, best_iou = j, overlap
            if best is not None:
                break

        result.pred_to_gt.append(best)
        if best is None:
            result.tp.append(False)
            result.pred_ignored.append(bool(pred_out_of_band[i]))
        else:
            result.gt_matched[best] = True
            result.tp.append(not gt_ignore[best])
            result.pred_ignored.append(bool(gt_ignore[best]))
    return result


def average_precision(tp_flags: Sequence[bool], gt_count: int) -> Optional[float]:
    """
    101-point interpolated AP from TP/FP flags in descending score order.
    Undefined (None) when there is neither ground truth nor a counted prediction.
    """
    flags = np.asarray(tp_flags, dtype=bool)
    if gt_count <= 0:
        return None if flags.size == 0 else 0.0
    if flags.size == 0:
        return 0.0

    tp = np.cumsum(flags).astype(np.float64)
    fp = np.cumsum(~flags).astype(np.float64)
    recall = tp / gt_count
    precision = tp / (tp + fp)

    # Precision envelope: max to the right
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    inds = np.searchsorted(recall, RECALL_GRID, side="left")
    sampled = np.where(inds < len(precision), precision[np.minimum(inds, len(precision) - 1)], 0.0)
    return float(np.mean(sampled))


def _sorted_preds(preds: Sequence[Detection]) -> List[Detection]:
    return sorted(preds, key=lambda d: -d.score)


def accumulate(
    frames: Sequence[Tuple[Sequence[Detection], Sequence[BBox]]],
    iou_thr: float,
    band: Tuple[float, float] = SIZE_BANDS["all"],
) -> Tuple[List[bool], int]:
    """Dataset-wide TP flags in descending score order and the counted gt total"""
    scored: List[Tuple[float, bool]] = []
    gt_count = 0
    for preds, gts in frames:
        preds = _sorted_preds(preds)
        gt_ignore = [not _in_band(g, band) for g in gts]
        out_of_band = [not _in_band(p.box, band) for p in preds]
        gt_count += sum(1 for ignore in gt_ignore if not ignore)
        result = match_greedy(preds, gts, iou_thr, gt_ignore, out_of_band)
        for pred, tp, ignored in zip(preds, result.tp, result.pred_ignored):
            if not ignored:
                scored.append((pred.score, tp))

    # Stable: equal scores keep frame order
    order = sorted(range(len(scored)), key=lambda k: -scored[k][0])
    return [scored[k][1] for k in order], gt_count


def _mean_over_thresholds(frames, band) -> Optional[float]:
    values = []
    for thr in IOU_THRESHOLDS:
        ap = average_precision(*accumulate(frames, float(thr), band))
        if ap is None:
            return None
        values.append(ap)
    return float(np.mean(values))


class EvaluationService:

    def coco_metrics(self, preds: Sequence[Sequence[Detection]],
                     gts: Sequence[Sequence[BBox]]) -> MetricValues:
        """Metric set over aligned per-frame prediction and ground-truth lists"""
        if len(preds) != len(gts):
            raise InvalidParameterError(f"{len(preds)} prediction frames vs {len(gts)} ground-truth frames")
        frames = list(zip(preds, gts))
        everything = SIZE_BANDS["all"]
        return {
            MetricId.AP: _mean_over_thresholds(frames, everything),
            MetricId.AP50: average_precision(*accumulate(frames, 0.5, everything)),
            MetricId.AP75: average_precision(*accumulate(frames, 0.75, everything)),
            MetricId.AP_L: _mean_over_thresholds(frames, SIZE_BANDS["large"]),
            MetricId.AP_M: _mean_over_thresholds(frames, SIZE_BANDS["medium"]),
        }

    def score_k(self, per_config_metrics: Mapping[str, Mapping[MetricId, Optional[float]]],
                partition: Partition) -> ScoreReport:
        """Per-metric mean and deviation over the partition's configurations"""
        config_ids = partition.ordered_ids()
        missing = [cid for cid in config_ids if cid not in per_config_metrics]
        if missing:
            raise IncompleteInputError(missing)

        report = ScoreReport(
            test_set=partition.name,
            per_config={cid: dict(per_config_metrics[cid]) for cid in config_ids},
        )
        metrics = sorted({m for cid in config_ids for m in per_config_metrics[cid]},
                         key=lambda m: METRIC_IDS.index(MetricId(m)))
        for metric in metrics:
            values = [
                per_config_metrics[cid][metric] for cid in config_ids
                if per_config_metrics[cid].get(metric) is not None
            ]
            report.summary[MetricId(metric)] = summarize(values)

        logger.info(f"Score for {partition.name}: " + ", ".join(
            f"{m.value}={s.mean:.4f}" for m, s in report.summary.items() if s.mean is not None
        ))
        return report

    def score_partitions(self, per_config_metrics: Mapping[str, Mapping[MetricId, Optional[float]]],
                         partitions: Iterable[Partition]) -> List[ScoreReport]:
        """Score every partition whose configurations are all present"""
        available = set(per_config_metrics)
        return [
            self.score_k(per_config_metrics, partition)
            for partition in partitions
            if partition.config_ids <= available
        ]


def summarize(values: Sequence[float]) -> MetricSummary:
    if not values:
        return MetricSummary()
    arr = np.asarray(values, dtype=np.float64)
    return MetricSummary(
        mean=float(math.fsum(values) / len(values)),
        std=float(arr.std(ddof=1)) if len(values) > 1 else 0.0,
        pstd=float(arr.std(ddof=0)),
        count=len(values),
    )


def relative_change(value: Optional[float], reference: Optional[float]) -> Optional[float]:
    """Relative change of a metric against a reference configuration"""
    if value is None or reference is None or reference == 0:
        return None
    return (value - reference) / reference


# Global service instance
evaluation_service = EvaluationService()


def coco_metrics(preds: Sequence[Sequence[Detection]], gts: Sequence[Sequence[BBox]]) -> MetricValues:
    return evaluation_service.coco_metrics(preds, gts)


def score_k(per_config_metrics: Mapping[str, Mapping[MetricId, Optional[float]]],
            partition: Partition) -> ScoreReport:
    return evaluation_service.score_k(per_config_metrics, partition)
