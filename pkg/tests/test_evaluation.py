import itertools

import numpy as np
import pytest

from evsense.exceptions import IncompleteInputError, InvalidParameterError
from evsense.models.dataset_models import BBox
from evsense.models.detection_models import Detection
from evsense.models.evaluation_models import MetricId
from evsense.services.dataset_service import PARTITIONS
from evsense.services.evaluation_service import (
    IOU_THRESHOLDS,
    PUBLISHED_AP,
    RECALL_GRID,
    accumulate,
    average_precision,
    coco_metrics,
    evaluation_service,
    iou,
    match_greedy,
    relative_change,
    score_k,
    summarize,
)

PUBLISHED_MEANS = {
    "RVT-B/base": {"test1": 34.63, "test2": 37.49, "test3": 34.07, "test4": 30.58},
    "RVT-B/train": {"test1": 37.41, "test2": 39.37, "test3": 38.85, "test4": 34.16},
    "SSMS-B/base": {"test1": 38.18, "test2": 39.92, "test3": 40.61, "test4": 33.33},
    "SSMS-B/train": {"test1": 42.42, "test2": 44.76, "test3": 45.64, "test4": 39.06},
}

PUBLISHED_STDS = {
    "RVT-B/base": {"test1": 14.7, "test2": 7.3, "test3": 0.2, "test4": 4.9},
    "RVT-B/train": {"test1": 10.7, "test2": 4.5, "test3": 1.6, "test4": 4.4},
    "SSMS-B/base": {"test1": 16.6, "test2": 8.5, "test3": 0.1, "test4": 3.5},
    "SSMS-B/train": {"test1": 13.1, "test2": 5.4, "test3": 3.5, "test4": 2.5},
}


def bbox(x, y, w, h):
    return BBox(x=x, y=y, w=w, h=h)


def det(x, y, w, h, score=0.9):
    return Detection(box=bbox(x, y, w, h), score=score)


def test_iou_values():
    assert iou(bbox(0, 0, 10, 10), bbox(0, 0, 10, 10)) == 1.0
    assert iou(bbox(0, 0, 10, 10), bbox(5, 0, 10, 10)) == pytest.approx(1 / 3)
    assert iou(bbox(0, 0, 10, 10), bbox(20, 20, 5, 5)) == 0.0


def test_iou_thresholds_are_exact_decimals():
    assert list(IOU_THRESHOLDS) == [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]


def test_match_respects_threshold():
    gt = [bbox(0, 0, 100, 100)]
    pred = [det(0, 0, 60, 100)]  # IoU 0.6
    assert match_greedy(pred, gt, 0.5).tp == [True]
    missed = match_greedy(pred, gt, 0.75)
    assert missed.tp == [False]
    assert missed.false_negatives == 1


def test_match_is_one_to_one():
    result = match_greedy([det(0, 0, 10, 10, 0.9), det(0, 0, 10, 10, 0.8)], [bbox(0, 0, 10, 10)], 0.5)
    assert result.tp == [True, False]
    assert result.pred_to_gt == [0, None]


def test_match_prefers_highest_iou_then_lowest_index():
    gts = [bbox(0, 0, 10, 10), bbox(2, 0, 10, 10), bbox(2, 0, 10, 10)]
    result = match_greedy([det(2, 0, 10, 10)], gts, 0.5)
    assert result.pred_to_gt == [1]


def exhaustive_best_tp(preds, gts, thr):
    """Largest TP count over all one-to-one assignments"""
    best = 0
    for perm in itertools.permutations(range(len(gts)), min(len(preds), len(gts))):
        best = max(best, sum(1 for i, j in enumerate(perm) if iou(preds[i].box, gts[j]) >= thr))
    return best


def test_greedy_matching_agrees_with_exhaustive_search_on_separated_objects():
    gts = [bbox(0, 0, 20, 20), bbox(100, 0, 20, 20), bbox(0, 100, 20, 20)]
    preds = [det(2, 1, 20, 20, 0.9), det(101, 3, 20, 20, 0.7), det(50, 50, 20, 20, 0.6), det(1, 98, 20, 20, 0.5)]
    for thr in IOU_THRESHOLDS:
        assert sum(match_greedy(preds, gts, float(thr)).tp) == exhaustive_best_tp(preds, gts, float(thr))


def test_average_precision_edge_cases():
    assert average_precision([True, True], 2) == 1.0
    assert average_precision([], 3) == 0.0
    assert average_precision([False], 0) == 0.0
    assert average_precision([], 0) is None


def test_average_precision_interpolates_precision_envelope():
    # recall 1/3, 1/3, 2/3 with precision 1, 0.5, 0.67: 34 grid points at 1, 33 at 0.67, the rest 0
    ap = average_precision([True, False, True], 3)
    expected = (34 * 1.0 + 33 * (2 / 3)) / 101
    assert ap == pytest.approx(expected)


def test_perfect_predictions_score_one():
    gts = [[bbox(10, 10, 100, 100), bbox(200, 10, 50, 50)], [bbox(0, 0, 60, 60)]]
    preds = [[Detection(box=g, score=0.9) for g in frame] for frame in gts]
    metrics = coco_metrics(preds, gts)
    assert all(value == 1.0 for value in metrics.values())


def test_iou_point_six_case():
    metrics = coco_metrics([[det(0, 0, 60, 100)]], [[bbox(0, 0, 100, 100)]])
    assert metrics[MetricId.AP50] == 1.0
    assert metrics[MetricId.AP75] == 0.0
    assert metrics[MetricId.AP] == pytest.approx(0.3)
    assert metrics[MetricId.AP_L] == pytest.approx(0.3)


def test_size_band_without_ground_truth_is_undefined():
    metrics = coco_metrics([[]], [[bbox(0, 0, 100, 100)]])
    assert metrics[MetricId.AP] == 0.0
    assert metrics[MetricId.AP_M] is None


def test_frame_count_mismatch_is_rejected():
    with pytest.raises(InvalidParameterError):
        coco_metrics([[]], [[], []])


def test_frame_predictions_are_matched_in_score_order():
    # the stronger duplicate takes the object even though it is listed second
    flags, gt_count = accumulate([([det(0, 0, 50, 50, 0.2), det(0, 0, 50, 50, 0.9)], [bbox(0, 0, 50, 50)])], 0.5)
    assert flags == [True, False]
    assert gt_count == 1


def score_order_assignment(preds, gts, thr):
    """
    Among every one-to-one assignment of predictions to ground truth (or to nothing),
    the single one in which each prediction, taken by descending score, holds the
    unclaimed object it overlaps most (lowest index on ties) whenever one reaches thr.
    """
    order = sorted(range(len(preds)), key=lambda i: -preds[i].score)
    overlap = [[iou(p.box, g) for g in gts] for p in preds]
    chosen = []
    for assignment in itertools.product([None, *range(len(gts))], repeat=len(preds)):
        taken = [j for j in assignment if j is not None]
        if len(taken) != len(set(taken)):
            continue
        claimed, consistent = set(), True
        for i in order:
            overlaps = [(overlap[i][j], -j) for j in range(len(gts)) if j not in claimed and overlap[i][j] >= thr]
            expected = -max(overlaps)[1] if overlaps else None
            if assignment[i] != expected:
                consistent = False
                break
            if expected is not None:
                claimed.add(expected)
        if consistent:
            chosen.append(assignment)
    assert len(chosen) == 1
    return [(preds[i].score, chosen[0][i] is not None) for i in order]


def reference_ap(frames, thr):
    scored = sorted((pair for preds, gts in frames for pair in score_order_assignment(preds, gts, thr)),
                    key=lambda pair: -pair[0])
    gt_count = sum(len(gts) for _, gts in frames)
    if gt_count == 0:
        return None if not scored else 0.0
    precisions, recalls, tp = [], [], 0
    for k, (_, hit) in enumerate(scored, start=1):
        tp += hit
        precisions.append(tp / k)
        recalls.append(tp / gt_count)
    sampled = [max((p for p, r in zip(precisions, recalls) if r >= level), default=0.0) for level in RECALL_GRID]
    return sum(sampled) / len(sampled)


def random_box(rng):
    x, y = (float(v) for v in rng.integers(0, 120, size=2))
    w, h = (float(v) for v in rng.integers(10, 60, size=2))
    return bbox(x, y, w, h)


def random_frame(rng, scores):
    gts = [random_box(rng) for _ in range(int(rng.integers(0, 6)))]
    preds = []
    for _ in range(int(rng.integers(0, 6))):
        if gts and rng.random() < 0.7:
            base = gts[int(rng.integers(0, len(gts)))]
            jitter = rng.integers(-8, 9, size=4)
            box = bbox(base.x + float(jitter[0]), base.y + float(jitter[1]),
                       max(4.0, base.w + float(jitter[2])), max(4.0, base.h + float(jitter[3])))
        else:
            box = random_box(rng)
        preds.append(Detection(box=box, score=scores.pop()))
    return preds, gts


@pytest.mark.slow
def test_matching_and_ap_agree_with_exhaustive_assignment_search(rng):
    for trial in range(500):
        scores = [float(s) for s in rng.permutation(np.linspace(0.01, 0.99, 15))]
        frames = [random_frame(rng, scores) for _ in range(int(rng.integers(1, 4)))]
        for thr in (0.5, 0.75):
            expected = reference_ap(frames, thr)
            actual = average_precision(*accumulate(frames, thr))
            if expected is None:
                assert actual is None, f"trial {trial}"
            else:
                assert actual == pytest.approx(expected, abs=1e-12), f"trial {trial} at IoU {thr}"


def test_global_ranking_pools_frames():
    frames = [([det(0, 0, 50, 50, 0.3)], [bbox(0, 0, 50, 50)]), ([det(0, 0, 50, 50, 0.9)], [bbox(200, 0, 50, 50)])]
    flags, gt_count = accumulate(frames, 0.5)
    assert flags == [False, True]
    assert gt_count == 2


def test_summarize_uses_sample_deviation():
    summary = summarize([1.0, 2.0, 3.0])
    assert summary.mean == 2.0
    assert summary.std == pytest.approx(1.0)
    assert summary.pstd == pytest.approx((2 / 3) ** 0.5)
    assert summarize([4.0]).std == 0.0
    assert summarize([]).mean is None


def test_score_k_requires_every_partition_config():
    with pytest.raises(IncompleteInputError) as info:
        score_k({"e2": {MetricId.AP: 0.1}, "e5": {MetricId.AP: 0.2}}, PARTITIONS["test2"])
    assert info.value.missing == ["e8"]


def test_score_k_averages_partition_configs():
    report = score_k({"e2": {MetricId.AP: 0.1}, "e5": {MetricId.AP: 0.2}, "e8": {MetricId.AP: 0.6},
                      "base": {MetricId.AP: 0.9}}, PARTITIONS["test2"])
    assert report.mean(MetricId.AP) == pytest.approx(0.3)
    assert list(report.per_config) == ["e2", "e5", "e8"]


@pytest.mark.parametrize("source", sorted(PUBLISHED_AP))
@pytest.mark.parametrize("test_set", ["test1", "test2", "test3", "test4"])
def test_published_aggregates_are_reproduced(source, test_set):
    per_config = {cid: {MetricId.AP: value} for cid, value in PUBLISHED_AP[source].items()}
    summary = score_k(per_config, PARTITIONS[test_set]).summary[MetricId.AP]
    assert summary.mean == pytest.approx(PUBLISHED_MEANS[source][test_set], abs=0.01)
    assert summary.std == pytest.approx(PUBLISHED_STDS[source][test_set], abs=0.05)


def test_score_partitions_skips_uncovered_partitions():
    per_config = {cid: {MetricId.AP: 0.5} for cid in ["e12", "e13", "e10"]}
    reports = evaluation_service.score_partitions(per_config, PARTITIONS.values())
    assert [r.test_set for r in reports] == ["test4"]


def test_relative_change():
    assert relative_change(0.3, 0.6) == pytest.approx(-0.5)
    assert relative_change(None, 0.6) is None
    assert relative_change(0.3, 0.0) is None
