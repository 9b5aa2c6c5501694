"""Confusion-matrix metrics at a fixed alert threshold."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping


@dataclass(frozen=True)
class Metrics:
    """Precision/recall/F1/accuracy plus the raw confusion counts.

    Zero-denominator ratios are reported as 0.0 with the matching
    ``*_defined`` flag cleared.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    precision_defined: bool
    recall_defined: bool
    f1_defined: bool

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(
    predictions: Mapping[str, float],
    labels: Mapping[str, int],
    theta: float,
) -> Metrics:
    """Score every labeled transaction: positive iff score strictly above theta."""
    if not labels:
        raise ValueError("empty labeled set")
    tp = fp = tn = fn = 0
    for tx_id, label in labels.items():
        if tx_id not in predictions:
            raise ValueError(f"missing prediction for labeled transaction {tx_id}")
        positive = predictions[tx_id] > theta
        if label not in (0, 1):
            raise ValueError(f"label for {tx_id} must be 0 or 1, got {label}")
        if positive and label == 1:
            tp += 1
        elif positive and label == 0:
            fp += 1
        elif not positive and label == 1:
            fn += 1
        else:
            tn += 1

    precision_defined = (tp + fp) > 0
    recall_defined = (tp + fn) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn) if recall_defined else 0.0
    f1_defined = precision_defined and recall_defined and (precision + recall) > 0
    f1 = 2 * precision * recall / (precision + recall) if f1_defined else 0.0
    total = tp + fp + tn + fn
    return Metrics(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=(tp + tn) / total,
        precision_defined=precision_defined,
        recall_defined=recall_defined,
        f1_defined=f1_defined,
    )
