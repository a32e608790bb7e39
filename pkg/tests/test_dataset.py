import json

import pytest

from evsense.exceptions import (
    DuplicateSequenceError,
    InvalidParameterError,
    MalformedDocumentError,
    MalformedManifestError,
    MissingPathError,
    UnknownConfigError,
    UnknownPartitionError,
)
from evsense.models.dataset_models import BBox, DatasetManifest, LabelRecord, SequenceEntry, Split
from evsense.services.config_registry import config_registry
from evsense.services.dataset_service import PARTITIONS, dataset_service, filter_boxes, partition_for, split_towns
from evsense.storage.documents import load_manifest, read_labels, save_manifest, write_labels

TOWNS = [f"Town{k:02d}" for k in range(1, 14)]


def box(w, h):
    return BBox(x=0, y=0, w=w, h=h)


@pytest.mark.parametrize("w, h, kept", [(19, 100, False), (30, 60, True), (25, 50, False), (60, 20, True)])
def test_filter_boxes_size_rules(w, h, kept):
    assert filter_boxes([box(w, h)]) == ([box(w, h)] if kept else [])


def test_filter_is_idempotent_and_keeps_order():
    boxes = [box(30, 60), box(19, 100), box(80, 80), box(25, 50), box(45, 45)]
    once = filter_boxes(boxes)
    assert once == [box(30, 60), box(80, 80), box(45, 45)]
    assert filter_boxes(once) == once


@pytest.mark.slow
def test_filter_is_idempotent_on_random_box_sets(rng):
    for _ in range(1000):
        n = int(rng.integers(0, 20))
        sizes = rng.uniform(1.0, 120.0, size=(n, 2))
        boxes = [BBox(x=float(k), y=0.0, w=float(w), h=float(h)) for k, (w, h) in enumerate(sizes)]
        once = filter_boxes(boxes)
        assert filter_boxes(once) == once
        assert all(min(b.w, b.h) >= 20 and b.diagonal >= 60 for b in once)
        dropped = [b for b in boxes if b not in once]
        assert all(min(b.w, b.h) < 20 or b.diagonal < 60 for b in dropped)
        assert [b.x for b in once] == sorted(b.x for b in once)


@pytest.mark.parametrize("n, sizes", [(13, (9, 2, 2)), (3, (1, 1, 1)), (20, (14, 3, 3))])
def test_split_sizes(n, sizes):
    assert dataset_service.split_sizes(n) == sizes


def test_split_towns_assigns_every_town_deterministically():
    first = split_towns(TOWNS, seed=4)
    assert first == split_towns(TOWNS, seed=4)
    assert sorted(first) == TOWNS
    counts = [sum(1 for s in first.values() if s == split) for split in Split]
    assert counts == [9, 2, 2]


def test_split_towns_needs_three_towns():
    with pytest.raises(InvalidParameterError):
        split_towns(["Town01", "Town02"])


@pytest.mark.parametrize("name, ids", [
    ("train", ["base", "e1", "e3", "e4", "e6", "e7", "e9"]),
    ("test1", ["base", "e1", "e3", "e4", "e6", "e7", "e9"]),
    ("test2", ["e2", "e5", "e8"]),
    ("test3", ["e10", "e11"]),
    ("test4", ["e12", "e13"]),
])
def test_partition_members(name, ids):
    assert partition_for(name).ordered_ids() == ids


def test_test_partitions_are_disjoint_from_training():
    names = ["train", "test2", "test3", "test4"]
    for a in names:
        for b in names:
            if a != b:
                assert not PARTITIONS[a].config_ids & PARTITIONS[b].config_ids


def test_partitions_cover_the_registry():
    covered = set().union(*(p.config_ids for p in PARTITIONS.values()))
    assert covered == set(config_registry.ids())


def test_unknown_partition():
    with pytest.raises(UnknownPartitionError):
        partition_for("test5")


def test_build_manifest_covers_towns_routes_and_configs():
    manifest = dataset_service.build_manifest(TOWNS, [f"r{k}" for k in range(12)])
    assert len(manifest.sequences) == 13 * 12 * 14
    assert set(manifest.splits) == set(TOWNS)
    test2 = dataset_service.sequences_for(manifest, Split.TEST, "test2")
    assert {s.config_id for s in test2} == {"e2", "e5", "e8"}
    assert all(manifest.split_of(s) == Split.TEST for s in test2)


def test_manifest_round_trip(tmp_path):
    manifest = dataset_service.build_manifest(["Town01", "Town02", "Town03"], ["r0"], ["base"])
    path = tmp_path / "manifest.json"
    save_manifest(manifest, path)
    assert load_manifest(path) == manifest


def test_manifest_with_unknown_config_is_rejected(tmp_path):
    manifest = dataset_service.build_manifest(["Town01", "Town02", "Town03"], ["r0"], ["base"])
    document = json.loads(manifest.model_dump_json())
    document["sequences"][0]["config_id"] = "e99"
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(document))
    with pytest.raises(UnknownConfigError):
        load_manifest(path)


def test_manifest_with_duplicate_sequence_is_rejected(tmp_path):
    entry = SequenceEntry(sequence_id="a", town_id="Town01", config_id="base",
                          frames_path="a.frm", events_path="a.evt", labels_path="a.ndjson")
    manifest = DatasetManifest(sequences=[entry, entry], splits={"Town01": Split.TRAIN})
    with pytest.raises(DuplicateSequenceError):
        save_manifest(manifest, tmp_path / "manifest.json")


def test_manifest_path_check(tmp_path):
    manifest = dataset_service.build_manifest(["Town01", "Town02", "Town03"], ["r0"], ["base"])
    path = tmp_path / "manifest.json"
    save_manifest(manifest, path)
    with pytest.raises(MissingPathError):
        load_manifest(path, check_paths=True)


def test_malformed_manifest(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{not json")
    with pytest.raises(MalformedManifestError):
        load_manifest(path)


def test_labels_document_round_trip(tmp_path):
    labels = [LabelRecord(frame_index=0, t_ns=0, boxes=[box(30, 60)]), LabelRecord(frame_index=1, t_ns=50)]
    path = tmp_path / "labels.ndjson"
    assert write_labels(labels, path) == 2
    assert read_labels(path) == labels


def test_malformed_labels_name_the_line(tmp_path):
    path = tmp_path / "labels.ndjson"
    path.write_text('{"frame_index": 0, "t_ns": 0}\n{"frame_index": -1, "t_ns": 0}\n')
    with pytest.raises(MalformedDocumentError, match=":2:"):
        read_labels(path)
