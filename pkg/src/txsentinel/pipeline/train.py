"""Offline training driver: chronological split, snapshot build, fit.

Node-level training labels are derived from transaction labels: a node is
positive when it sent at least one illicit transaction in the training
window, negative when it sent only licit ones, and excluded otherwise
(receivers-only and unlabeled senders carry no supervision).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..embed.base import Embedder
from ..graph.betweenness import betweenness_all
from ..graph.dynamic import DecayParams, TransactionGraph
from ..ingest.transactions import Label, Transaction
from ..model.narrative import batch_node_narratives
from ..model.network import ModelBundle, build_graph_view, init_model
from ..model.training import TrainingData, TrainResult, fit
from ..pipeline.metrics import Metrics, evaluate
from .config import PipelineConfig
from .split import SplitResult, chronological_split


def node_labels_from_transactions(transactions: Iterable[Transaction]) -> dict[str, int]:
    """Sender-aggregated labels: any illicit send marks the node positive."""
    labels: dict[str, int] = {}
    for tx in transactions:
        if tx.label is Label.ILLICIT:
            labels[tx.sender] = 1
        elif tx.label is Label.LICIT:
            labels.setdefault(tx.sender, 0)
    return labels


def build_transaction_graph(
    transactions: Iterable[Transaction],
    config: PipelineConfig,
    embedder: Embedder,
) -> TransactionGraph:
    """Replay a stream into a fresh graph, embeddings attached, window pruned."""
    graph = TransactionGraph(
        decay=DecayParams(config.alpha), horizon=config.window_horizon
    )
    for tx in transactions:
        embedding = embedder.embed_normalized(tx.narrative) if tx.narrative else None
        graph.insert_transaction(tx, embedding)
        graph.prune_window()
    return graph


def build_training_data(
    graph: TransactionGraph,
    embedder: Embedder,
    node_labels: dict[str, int],
    betweenness_samples: int | None = None,
) -> "TrainingData":
    """Freeze the graph into matrices: view, compressed features, narratives, labels."""
    view = build_graph_view(graph)
    betweenness = betweenness_all(graph, sample_sources=betweenness_samples)
    narratives = batch_node_narratives(graph, embedder)

    n = len(view.names)
    features = np.empty((n, 4))
    narrative_matrix = np.empty((n, embedder.dimension))
    labels = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for i, name in enumerate(view.names):
        features[i] = graph.node_structural_features(name, betweenness).as_vector()
        narrative_matrix[i] = narratives[name]
        if name in node_labels:
            labels[i] = float(node_labels[name])
            mask[i] = True
    return TrainingData(
        view=view,
        features=np.log1p(features),
        narratives=narrative_matrix,
        labels=labels,
        label_mask=mask,
    )


@dataclass
class TrainOutcome:
    bundle: ModelBundle
    result: TrainResult
    split: SplitResult
    train_metrics: Metrics
    labeled_nodes: int


def train_from_stream(
    config: PipelineConfig,
    transactions: Sequence[Transaction],
    embedder: Embedder,
) -> TrainOutcome:
    """Chronological split, graph build over the training window, full fit."""
    split = chronological_split(transactions, config.train_ratio)
    graph = build_transaction_graph(split.train, config, embedder)
    node_labels = {
        node: lab
        for node, lab in node_labels_from_transactions(split.train).items()
        if node in graph
    }
    data = build_training_data(
        graph, embedder, node_labels, betweenness_samples=config.betweenness_samples
    )
    bundle = init_model(config.dims, seed=config.train.seed)
    result = fit(bundle, data, config.train)

    # node-level metrics on the training snapshot at the alert threshold
    from ..model.training import forward_full

    state = forward_full(bundle, data)
    predictions = {
        name: float(state.scores[i])
        for i, name in enumerate(data.view.names)
        if data.label_mask[i]
    }
    labeled = {name: int(data.labels[data.view.index[name]]) for name in predictions}
    train_metrics = evaluate(predictions, labeled, config.theta)
    return TrainOutcome(
        bundle=bundle,
        result=result,
        split=split,
        train_metrics=train_metrics,
        labeled_nodes=len(labeled),
    )
