# Dataset bookkeeping: box filtering, town splits, configuration partitions, manifest assembly
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from evsense.exceptions import InvalidParameterError, UnknownPartitionError
from evsense.models.dataset_models import BBox, DatasetManifest, Partition, SequenceEntry, Split
from evsense.services.config_registry import config_registry

logger = logging.getLogger(__name__)

MIN_SIDE_PX = 20
MIN_DIAGONAL_PX = 60

SPLIT_FRACTIONS = (0.70, 0.15, 0.15)

_TRAIN_IDS = frozenset({"base", "e1", "e3", "e4", "e6", "e7", "e9"})

PARTITIONS: Dict[str, Partition] = {
    "train": Partition(name="train", config_ids=_TRAIN_IDS,
                       description="lower and upper bounds of each parameter range"),
    "test1": Partition(name="test1", config_ids=_TRAIN_IDS,
                       description="same sensor characteristics as training"),
    "test2": Partition(name="test2", config_ids=frozenset({"e2", "e5", "e8"}),
                       description="one setting interpolated inside the training range"),
    "test3": Partition(name="test3", config_ids=frozenset({"e10", "e11"}),
                       description="seen values combined into new configurations"),
    "test4": Partition(name="test4", config_ids=frozenset({"e12", "e13"}),
                       description="unseen values for every setting"),
}


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


class DatasetService:

    def filter_boxes(self, boxes: Iterable[BBox]) -> List[BBox]:
        """Drop boxes with a side under 20 px or a diagonal under 60 px, keeping order"""
        kept = [
            b for b in boxes
            if min(b.w, b.h) >= MIN_SIDE_PX and b.diagonal >= MIN_DIAGONAL_PX
        ]
        return kept

    def split_sizes(self, n: int) -> tuple:
        """70-15-15 split sizes with at least one town per split"""
        if n < 3:
            raise InvalidParameterError(f"a train/val/test split needs at least 3 towns, got {n}")
        n_train = _round_half_up(SPLIT_FRACTIONS[0] * n)
        n_val = max(1, _round_half_up(SPLIT_FRACTIONS[1] * n))
        n_test = n - n_train - n_val
        if n_test < 1:
            n_train -= 1 - n_test
            n_test = 1
        return n_train, n_val, n_test

    def split_towns(self, town_ids: Sequence[str], seed: int = 0) -> Dict[str, Split]:
        towns = sorted(set(town_ids))
        if len(towns) != len(town_ids):
            logger.warning(f"Duplicate town ids ignored: {len(town_ids) - len(towns)} duplicates")
        n_train, n_val, _ = self.split_sizes(len(towns))

        order = np.random.default_rng(seed).permutation(len(towns))
        assignment: Dict[str, Split] = {}
        for rank, idx in enumerate(order):
            if rank < n_train:
                split = Split.TRAIN
            elif rank < n_train + n_val:
                split = Split.VAL
            else:
                split = Split.TEST
            assignment[towns[int(idx)]] = split

        logger.info(f"Split {len(towns)} towns into {self.split_sizes(len(towns))} (seed={seed})")
        return {town: assignment[town] for town in towns}

    def partition_for(self, name: str) -> Partition:
        try:
            return PARTITIONS[name]
        except KeyError:
            raise UnknownPartitionError(name, PARTITIONS) from None

    def build_manifest(self, town_ids: Sequence[str], route_ids: Sequence[str],
                       config_ids: Optional[Sequence[str]] = None, seed: int = 0) -> DatasetManifest:
        """
        Manifest skeleton with one sequence per (town, route, configuration).
        Paths follow <config>/<town>_<route>.{frm,evt,ndjson}.
        """
        config_ids = list(config_ids) if config_ids else config_registry.ids()
        for config_id in config_ids:
            config_registry.get(config_id)

        sequences = []
        for town in town_ids:
            for route in route_ids:
                for config_id in config_ids:
                    stem = f"{config_id}/{town}_{route}"
                    sequences.append(SequenceEntry(
                        sequence_id=f"{town}_{route}_{config_id}",
                        town_id=town,
                        route_id=route,
                        config_id=config_id,
                        frames_path=f"{stem}.frm",
                        events_path=f"{stem}.evt",
                        labels_path=f"{stem}.ndjson",
                    ))
        return DatasetManifest(sequences=sequences, splits=self.split_towns(list(town_ids), seed))

    def sequences_for(self, manifest: DatasetManifest, split: Optional[Split] = None,
                      partition: Optional[str] = None) -> List[SequenceEntry]:
        config_ids = self.partition_for(partition).config_ids if partition else None
        return [
            s for s in manifest.sequences
            if (split is None or manifest.splits.get(s.town_id) == split)
            and (config_ids is None or s.config_id in config_ids)
        ]


# Global service instance
dataset_service = DatasetService()


def filter_boxes(boxes: Iterable[BBox]) -> List[BBox]:
    return dataset_service.filter_boxes(boxes)


def split_towns(town_ids: Sequence[str], seed: int = 0) -> Dict[str, Split]:
    return dataset_service.split_towns(town_ids, seed)


def partition_for(name: str) -> Partition:
    return dataset_service.partition_for(name)
