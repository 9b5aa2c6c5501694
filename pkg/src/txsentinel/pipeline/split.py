"""Chronological train/test partition (no shuffling, no leakage)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..errors import StreamOrderError
from ..ingest.transactions import Transaction


@dataclass(frozen=True)
class SplitResult:
    train: tuple[Transaction, ...]
    test: tuple[Transaction, ...]
    boundary_timestamp: int  # timestamp of the last training transaction


def chronological_split(transactions: Sequence[Transaction], ratio: float) -> SplitResult:
    """First ceil(ratio * n) transactions train, the rest test, order preserved."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0,1), got {ratio}")
    txs = list(transactions)
    if not txs:
        raise ValueError("cannot split an empty stream")
    for prev, cur in zip(txs, txs[1:]):
        if cur.timestamp < prev.timestamp:
            raise StreamOrderError(
                f"unordered input: {cur.tx_id} at {cur.timestamp} after "
                f"{prev.tx_id} at {prev.timestamp}"
            )
    cut = math.ceil(ratio * len(txs))
    cut = min(cut, len(txs))
    return SplitResult(
        train=tuple(txs[:cut]),
        test=tuple(txs[cut:]),
        boundary_timestamp=txs[cut - 1].timestamp,
    )
