"""Binary cross-entropy with class weighting and log-safety clamping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCORE_EPS = 1e-7  # scores are clamped to [EPS, 1-EPS] before the logs


@dataclass(frozen=True)
class LossValue:
    """Mean loss plus the per-example terms it averages."""

    value: float
    per_example: np.ndarray

    def __float__(self) -> float:
        return self.value


def bce_loss(scores: np.ndarray, labels: np.ndarray, pos_weight: float = 1.0) -> LossValue:
    """Mean of -w*y*log(p) - (1-y)*log(1-p); positive terms scaled by pos_weight."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape:
        raise ValueError(f"scores/labels length mismatch: {scores.shape} vs {labels.shape}")
    if scores.size == 0:
        raise ValueError("empty loss batch")
    p = np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS)
    terms = -pos_weight * labels * np.log(p) - (1.0 - labels) * np.log1p(-p)
    return LossValue(value=float(terms.mean()), per_example=terms)
