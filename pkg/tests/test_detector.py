import numpy as np
import pytest

from evsense.models.detection_models import DetectorParams, PredictionRecord
from evsense.models.evaluation_models import MetricId
from evsense.models.representation_models import RepresentationSpec, StackedHistogram
from evsense.models.scene_models import SceneObject, SceneSpec
from evsense.services.dataset_service import filter_boxes
from evsense.services.detector_service import BlobDetector, aligned_within_gap, density_map, detect, merge_extents
from evsense.services.evaluation_service import coco_metrics
from evsense.services.representation_service import representation_service
from evsense.services.scene_service import scene_service
from evsense.services.transduction_service import transduce_sequence
from tests.helpers import sensor

SPEC = RepresentationSpec(width=128, height=96)


def histogram(blocks=(), channel=2):
    data = np.zeros(SPEC.shape, dtype=np.uint8)
    for y, x, h, w, count in blocks:
        data[channel, y:y + h, x:x + w] = count
    return StackedHistogram(spec=SPEC, window_start=0, data=data)


def test_density_sums_channels():
    hist = histogram()
    hist.data[2, 5, 5] = 3
    hist.data[12, 5, 5] = 4
    hist.data[0, 1, 1] = 5
    density = density_map(hist)
    assert density[5, 5] == 7
    assert density[1, 1] == 5
    assert density.sum() == 12


def test_empty_histogram_gives_no_detections():
    assert detect(histogram()) == []


def test_dense_block_gives_one_tight_detection():
    detections = detect(histogram([(20, 30, 40, 40, 10)]), DetectorParams(density_threshold=2))
    assert len(detections) == 1
    box = detections[0].box
    assert (box.x, box.y, box.w, box.h) == (30.0, 20.0, 40.0, 40.0)
    assert detections[0].score == 1.0


def test_separated_blocks_give_two_detections():
    hist = histogram([(10, 5, 20, 20, 3), (50, 80, 20, 20, 6)])
    detections = BlobDetector(DetectorParams(density_threshold=2, dilation_radius=2)).detect(hist)
    assert len(detections) == 2
    # higher density first
    assert detections[0].box.x == 80.0
    assert detections[0].score > detections[1].score


def test_dilation_merges_nearby_fragments():
    hist = histogram([(10, 10, 20, 10, 5), (10, 22, 20, 10, 5)])
    merged = detect(hist, DetectorParams(dilation_radius=2))
    split = detect(hist, DetectorParams(dilation_radius=0, merge_gap_ratio=0))
    assert len(merged) == 1
    assert merged[0].box.w == 22.0
    assert len(split) == 2


def test_small_components_are_dropped():
    assert detect(histogram([(10, 10, 4, 4, 9)]), DetectorParams(dilation_radius=0, min_area=64)) == []


def test_equal_scores_order_by_origin():
    hist = histogram([(60, 10, 12, 12, 8), (10, 90, 12, 12, 8), (10, 10, 12, 12, 8)])
    detections = detect(hist, DetectorParams(dilation_radius=0, min_area=16))
    assert [(d.box.y, d.box.x) for d in detections] == [(10.0, 10.0), (10.0, 90.0), (60.0, 10.0)]


def test_removing_support_never_adds_a_stronger_detection():
    full = detect(histogram([(10, 10, 20, 20, 3), (50, 60, 20, 20, 3)]))
    reduced = detect(histogram([(10, 10, 20, 20, 3)]))
    assert len(reduced) < len(full)
    assert max(d.score for d in reduced) <= max(d.score for d in full)


def test_edge_bands_of_one_object_merge_into_one_box():
    # leading and trailing edges of a 62 px wide object, 30 px tall
    hist = histogram([(20, 10, 30, 6, 4), (20, 66, 30, 6, 4)])
    merged = detect(hist)
    assert len(merged) == 1
    box = merged[0].box
    assert (box.x, box.y, box.w, box.h) == (10.0, 20.0, 62.0, 30.0)
    assert len(detect(hist, DetectorParams(merge_gap_ratio=0))) == 2


def test_edge_bands_too_far_apart_stay_separate():
    hist = histogram([(20, 0, 10, 6, 4), (20, 100, 10, 6, 4)])
    assert len(detect(hist, DetectorParams(min_area=16))) == 2


def test_fragments_of_a_broken_edge_chain_together():
    # one column of 10 px pieces with 10 px holes, as left by a two-tone texture
    hist = histogram([(10 + 20 * k, 40, 10, 6, 3) for k in range(4)])
    detections = detect(hist, DetectorParams(dilation_radius=0, min_area=64))
    assert len(detections) == 1
    assert (detections[0].box.y, detections[0].box.h) == (10.0, 70.0)


def test_min_area_applies_to_the_merged_group():
    hist = histogram([(10, 10, 4, 4, 9), (10, 18, 4, 4, 9)])
    assert detect(hist, DetectorParams(dilation_radius=0, min_area=32)) != []
    assert detect(hist, DetectorParams(dilation_radius=0, min_area=32, merge_gap_ratio=0)) == []


@pytest.mark.parametrize("a,b,expected", [
    ((0, 0, 6, 30), (50, 0, 56, 30), True),
    ((0, 0, 6, 30), (100, 0, 106, 30), False),
    ((0, 0, 6, 30), (20, 20, 26, 50), False),  # rows share a third of the shorter band
    ((0, 0, 10, 10), (0, 12, 10, 20), True),
    ((0, 0, 10, 10), (5, 5, 15, 15), True),
])
def test_aligned_within_gap(a, b, expected):
    assert aligned_within_gap(a, b, 2.5) is expected
    assert aligned_within_gap(b, a, 2.5) is expected


def test_merge_extents_joins_through_grown_groups():
    # the outer pieces are too far apart on their own
    assert merge_extents([(0, 0, 10, 10), (12, 0, 22, 10), (24, 0, 34, 10)], 1.0) == [[0, 1, 2]]
    assert merge_extents([(24, 0, 34, 10), (0, 0, 10, 10), (12, 0, 22, 10)], 1.0) == [[0, 2, 1]]
    assert merge_extents([(0, 0, 10, 10), (40, 40, 50, 50)], 1.0) == [[0], [1]]


def crossing_object_scene(k):
    """320x240 scene with one flat 3x1.6 m object crossing at 8 m, brightness varying with k"""
    direction = 1.0 if k % 2 == 0 else -1.0
    return SceneSpec(
        seed=k,
        width=320,
        height=240,
        frame_rate=20.0,
        duration=0.5,
        fov_deg=90.0,
        background_level=110.0,
        objects=[SceneObject(
            size=(3.0, 1.6),
            position=(-1.5 * direction, 0.0, 8.0),
            velocity=(6.0 * direction, 0.0, 0.0),
            albedo=float(np.linspace(0.1, 0.9, 10)[k]),
            texture_contrast=0.2,
        )],
    )


def scene_ap50(spec, threshold):
    seq, labels = scene_service.generate_sequence(spec)
    stream = transduce_sequence(seq, sensor(th_p=threshold, th_n=threshold))
    rep = RepresentationSpec(width=spec.width, height=spec.height)
    plan, frame_indices = representation_service.plan_for_labels(labels, rep)
    preds = [detect(hist) for hist in representation_service.iter_window_histograms(stream, plan, rep)]
    gts = [filter_boxes(labels[k].boxes) for k in frame_indices]
    return coco_metrics(preds, gts)[MetricId.AP50]


@pytest.mark.slow
def test_detection_degrades_with_coarser_thresholds():
    scenes = [crossing_object_scene(k) for k in range(10)]
    mean_ap50 = {}
    for threshold in (0.5, 1.0):
        values = [scene_ap50(spec, threshold) for spec in scenes]
        values = [v for v in values if v is not None]
        mean_ap50[threshold] = float(np.mean(values))
    assert mean_ap50[0.5] > 0.2
    assert mean_ap50[1.0] <= mean_ap50[0.5]


def test_prediction_record_round_trip():
    detections = detect(histogram([(20, 30, 40, 40, 10)]))
    record = PredictionRecord.from_detections("seq", 3, detections)
    restored = PredictionRecord.model_validate_json(record.model_dump_json())
    assert [(d.box.x, d.box.y, d.box.w, d.box.h, d.score) for d in restored.detections()] == \
        [(d.box.x, d.box.y, d.box.w, d.box.h, d.score) for d in detections]
