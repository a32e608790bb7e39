# Models for detection metrics and per-test-set score reports
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class MetricId(str, Enum):
    AP = "AP"
    AP50 = "AP50"
    AP75 = "AP75"
    AP_L = "AP_L"
    AP_M = "AP_M"


METRIC_IDS: List[MetricId] = [MetricId.AP, MetricId.AP50, MetricId.AP75, MetricId.AP_L, MetricId.AP_M]

# None marks an undefined metric (no ground truth in the band)
MetricValues = Dict[MetricId, Optional[float]]


class MatchResult(BaseModel):
    """Greedy matching outcome for one image at one IoU threshold"""
    pred_to_gt: List[Optional[int]] = []
    tp: List[bool] = []
    pred_ignored: List[bool] = []
    gt_matched: List[bool] = []

    @property
    def false_negatives(self) -> int:
        return sum(1 for m in self.gt_matched if not m)


class MetricSummary(BaseModel):
    mean: Optional[float] = None
    std: float = 0.0  # sample deviation, ddof=1
    pstd: float = 0.0  # population deviation
    count: int = 0


class ScoreReport(BaseModel):
    test_set: str
    per_config: Dict[str, Dict[MetricId, Optional[float]]] = {}
    summary: Dict[MetricId, MetricSummary] = Field(default_factory=dict)

    def mean(self, metric: MetricId) -> Optional[float]:
        return self.summary[metric].mean
