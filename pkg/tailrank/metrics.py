"""Multi-label evaluation criteria over a score matrix and binary labels.

Rankings sort scores descending with ties broken by the lower label index.
Rows where a ranking metric is undefined (AUC: no positive or no negative
label; average precision: no positive label) are skipped.
"""

import logging
from typing import Any, Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from sklearn.metrics import hamming_loss as sk_hamming_loss
from sklearn.metrics import roc_auc_score

from .errors import UndefinedMetricError, UsageError
from .matrix import as_matrix

logger = logging.getLogger(__name__)


class EvalPair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scores: np.ndarray
    labels: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            data["scores"] = as_matrix(data.get("scores"), "scores")
            data["labels"] = as_matrix(data.get("labels"), "labels")
        return data

    @model_validator(mode="after")
    def _check(self):
        if self.scores.shape != self.labels.shape:
            raise ValueError(f"scores {self.scores.shape} and labels {self.labels.shape} differ in shape")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ValueError("labels must be 0/1")
        return self

    @property
    def n_labels(self) -> int:
        return self.scores.shape[1]


def ranking_order(scores: np.ndarray) -> np.ndarray:
    """Per-row label indices by descending score, lower index first on ties."""
    return np.argsort(-scores, axis=1, kind="stable")


def hamming_loss(pair: EvalPair) -> float:
    """Fraction of cells where round(score) (≥ 0.5 → 1) differs from the label."""
    predicted = (pair.scores >= 0.5).astype(np.float64)
    return float(sk_hamming_loss(pair.labels, predicted))


def top_k_accuracy(pair: EvalPair, k: int) -> float:
    """Mean precision@k over examples."""
    if not 1 <= k <= pair.n_labels:
        raise UsageError(f"k must be in [1, {pair.n_labels}], got {k}")
    top = ranking_order(pair.scores)[:, :k]
    hits = np.take_along_axis(pair.labels, top, axis=1).sum(axis=1)
    return float(np.mean(hits / k))


def per_example_auc(pair: EvalPair) -> np.ndarray:
    """AUC per row with ties counted ½; NaN where the row lacks a positive or a negative."""
    values = np.full(pair.scores.shape[0], np.nan)
    for i, (s, y) in enumerate(zip(pair.scores, pair.labels)):
        if 0 < y.sum() < y.size:
            values[i] = roc_auc_score(y, s)
    return values


def average_auc(pair: EvalPair) -> float:
    values = per_example_auc(pair)
    valid = ~np.isnan(values)
    if not valid.any():
        raise UndefinedMetricError("average AUC undefined: no example has both a positive and a negative label")
    return float(np.mean(values[valid]))


def per_example_precision(pair: EvalPair) -> np.ndarray:
    """Average precision per row; NaN where the row has no relevant label."""
    order = ranking_order(pair.scores)
    values = np.full(pair.scores.shape[0], np.nan)
    positions = np.arange(1, pair.n_labels + 1)
    for i in range(pair.scores.shape[0]):
        relevant_in_order = pair.labels[i, order[i]] == 1
        if not relevant_in_order.any():
            continue
        # rank of each relevant label and how many relevant labels sit at or above it
        ranks = positions[relevant_in_order]
        above = np.arange(1, ranks.size + 1)
        values[i] = float(np.mean(above / ranks))
    return values


def average_precision(pair: EvalPair) -> float:
    values = per_example_precision(pair)
    valid = ~np.isnan(values)
    if not valid.any():
        raise UndefinedMetricError("average precision undefined: no example has a relevant label")
    return float(np.mean(values[valid]))


class MetricReport(BaseModel):
    top_k: Dict[int, float]
    hamming_loss: float
    average_auc: float
    average_precision: float
    auc_skipped_rows: int
    ap_skipped_rows: int
    examples: int

    def metric_pairs(self) -> List[tuple]:
        pairs = [(f"top{k}_accuracy", value) for k, value in sorted(self.top_k.items())]
        pairs += [
            ("hamming_loss", self.hamming_loss),
            ("average_auc", self.average_auc),
            ("average_precision", self.average_precision),
        ]
        return pairs

    def pairs(self) -> List[tuple]:
        return self.metric_pairs() + [
            ("auc_skipped_rows", self.auc_skipped_rows),
            ("ap_skipped_rows", self.ap_skipped_rows),
            ("examples", self.examples),
        ]


def evaluate(scores: Any, labels: Any, ks: Sequence[int] = (1, 3, 5)) -> MetricReport:
    """
    Compute every criterion on one score/label pair.

    Args:
        scores: m×L decision values
        labels: m×L binary relevance
        ks: Cut-offs for top-k accuracy

    Returns:
        MetricReport including the skipped-row counts of the ranking metrics
    """
    pair = EvalPair(scores=scores, labels=labels)
    auc_values = per_example_auc(pair)
    ap_values = per_example_precision(pair)
    report = MetricReport(
        top_k={int(k): top_k_accuracy(pair, int(k)) for k in ks},
        hamming_loss=hamming_loss(pair),
        average_auc=average_auc(pair),
        average_precision=average_precision(pair),
        auc_skipped_rows=int(np.isnan(auc_values).sum()),
        ap_skipped_rows=int(np.isnan(ap_values).sum()),
        examples=pair.scores.shape[0],
    )
    logger.info(
        f"Evaluated {report.examples} examples: AUC={report.average_auc:.4f} "
        f"AP={report.average_precision:.4f} hamming={report.hamming_loss:.4f}"
    )
    return report
