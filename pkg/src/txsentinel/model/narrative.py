"""Node-level narrative aggregation (reference implementation).

The live graph keeps the same quantity incrementally (see
``TransactionGraph.narrative_aggregate``); the functions here recompute it
from the surviving edge list and are the batch/oracle path: training
snapshots are built with them, and tests pit import-time increments against
these recomputes.
"""

from __future__ import annotations

import numpy as np

from ..embed.base import Embedder
from ..graph.dynamic import DecayParams, TransactionGraph, decay_weight


def node_narrative(
    graph: TransactionGraph,
    node: str,
    embedder: Embedder,
    decay: DecayParams | None = None,
) -> np.ndarray:
    """Decay-weighted mean of the node's incoming narrative embeddings.

    Each non-empty incoming narrative is embedded and normalized, weighted by
    its edge's decay factor at the graph's current time, averaged, and the
    mean normalized again. Nodes with no embeddable incoming narratives get
    the zero vector (callers treat it as an absent feature).
    """
    if node not in graph:
        raise KeyError(f"unknown node: {node}")
    decay = decay or graph.decay
    total = np.zeros(embedder.dimension)
    weight = 0.0
    for edge in graph.in_edges(node):
        if not edge.narrative:
            continue
        e_hat = embedder.embed_normalized(edge.narrative)
        if e_hat is None:
            continue
        delta = decay_weight(decay, graph.now, edge.timestamp)
        total += delta * e_hat
        weight += delta
    if weight == 0.0:
        return np.zeros(embedder.dimension)
    mean = total / weight
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        return np.zeros(embedder.dimension)
    return mean / norm


def batch_node_narratives(
    graph: TransactionGraph,
    embedder: Embedder,
    decay: DecayParams | None = None,
) -> dict[str, np.ndarray]:
    """Narrative vectors for every node in one pass over the edge list."""
    decay = decay or graph.decay
    totals: dict[str, np.ndarray] = {}
    weights: dict[str, float] = {}
    for edge in graph.edges():
        if not edge.narrative:
            continue
        e_hat = embedder.embed_normalized(edge.narrative)
        if e_hat is None:
            continue
        delta = decay_weight(decay, graph.now, edge.timestamp)
        if edge.dst not in totals:
            totals[edge.dst] = np.zeros(embedder.dimension)
            weights[edge.dst] = 0.0
        totals[edge.dst] += delta * e_hat
        weights[edge.dst] += delta

    zero = np.zeros(embedder.dimension)
    out: dict[str, np.ndarray] = {}
    for node in graph.nodes():
        total = totals.get(node)
        if total is None or weights[node] == 0.0:
            out[node] = zero.copy()
            continue
        mean = total / weights[node]
        norm = float(np.linalg.norm(mean))
        out[node] = zero.copy() if norm == 0.0 else mean / norm
    return out
