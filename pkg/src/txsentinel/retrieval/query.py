"""Retrieval queries for flagged transactions.

The classifier's fused space and the clause space have different widths, so
retrieval queries live in the clause (text) space: the transaction narrative
is embedded together with red-flag phrases derived from the sender's
structural features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embed.base import Embedder
from ..errors import EmptyQueryError
from ..graph.dynamic import NodeFeatures, TransactionGraph
from ..ingest.transactions import Transaction

FALLBACK_QUERY_TEXT = "suspicious transaction activity"


@dataclass(frozen=True)
class FlagThresholds:
    """Feature levels above which a red-flag phrase fires (strictly greater)."""

    fan_in: float = 5.0
    fan_out: float = 5.0
    betweenness: float = 10.0
    frequency: float = 5.0


def thresholds_from_graph(
    graph: TransactionGraph,
    betweenness: dict[str, float],
    percentile: float = 95.0,
) -> FlagThresholds:
    """Refresh thresholds from the live degree/centrality/frequency distributions."""
    if graph.n_nodes == 0:
        return FlagThresholds()
    in_degs, out_degs, freqs = graph.degree_freq_arrays()
    bets = np.fromiter(betweenness.values(), dtype=np.float64) if betweenness else np.zeros(1)
    return FlagThresholds(
        fan_in=float(np.percentile(in_degs, percentile)),
        fan_out=float(np.percentile(out_degs, percentile)),
        betweenness=float(np.percentile(bets, percentile)),
        frequency=float(np.percentile(freqs, percentile)),
    )


def structural_flags(features: NodeFeatures, thresholds: FlagThresholds) -> list[str]:
    """Red-flag phrases for feature values above their thresholds."""
    flags = []
    if features.in_degree > thresholds.fan_in:
        flags.append("high fan-in")
    if features.out_degree > thresholds.fan_out:
        flags.append("high fan-out")
    if features.betweenness > thresholds.betweenness:
        flags.append("high betweenness intermediary")
    if features.frequency > thresholds.frequency:
        flags.append("rapid transaction frequency")
    return flags


def query_text(tx: Transaction, flags: list[str]) -> str:
    parts = [tx.narrative] if tx.narrative else []
    parts.extend(flags)
    return " ".join(parts)


def query_embedding(
    tx: Transaction,
    features: NodeFeatures,
    embedder: Embedder,
    thresholds: FlagThresholds | None = None,
    flags: list[str] | None = None,
) -> np.ndarray:
    """Normalized clause-space query: narrative plus appended red-flag phrases.

    ``flags`` overrides the threshold derivation when the caller has already
    computed them (the pipeline does, so alerts and queries always agree).
    """
    if flags is None:
        flags = structural_flags(features, thresholds or FlagThresholds())
    text = query_text(tx, flags)
    if not text:
        raise EmptyQueryError("empty query: no narrative text and no structural flags")
    vec = embedder.embed_normalized(text)
    if vec is None:
        raise EmptyQueryError(f"empty query: text {text!r} embeds to the zero vector")
    return vec
