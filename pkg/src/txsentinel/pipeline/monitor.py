"""Streaming monitor: insert, featurize, score, retrieve, explain, emit.

Per transaction, in order: embed the narrative, insert the edge, prune the
window, refresh betweenness and flag thresholds every ``betweenness_interval``
insertions, featurize the sender, score the sender's node state, and when the
score exceeds the threshold retrieve clauses and render the grounded
explanation. Alerts carry a monotone sequence number in emission order.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..embed.base import Embedder
from ..errors import DimensionMismatchError, EmptyQueryError
from ..explain.external import external_generate
from ..explain.template import AlertContext
from ..graph.betweenness import betweenness_all
from ..graph.dynamic import DecayParams, TransactionGraph
from ..ingest.transactions import Transaction
from ..model.network import ModelBundle, betweenness_by_slot, score_node_slots
from ..retrieval.index import ClauseIndex, query_top_k
from ..retrieval.query import (
    FALLBACK_QUERY_TEXT,
    FlagThresholds,
    query_embedding,
    structural_flags,
    thresholds_from_graph,
)
from .config import PipelineConfig


@dataclass(frozen=True)
class AlertClause:
    clause_id: str
    source: str
    similarity: float


@dataclass(frozen=True)
class Alert:
    seq: int
    tx_id: str
    score: float
    clauses: list[AlertClause]
    explanation: str
    generator: str  # "template" | "external"

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "tx_id": self.tx_id,
            "score": self.score,
            "clauses": [
                {"clause_id": c.clause_id, "source": c.source, "similarity": c.similarity}
                for c in self.clauses
            ],
            "explanation": self.explanation,
            "generator": self.generator,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def parse_alert(line: str) -> Alert:
    obj = json.loads(line)
    return Alert(
        seq=int(obj["seq"]),
        tx_id=obj["tx_id"],
        score=float(obj["score"]),
        clauses=[
            AlertClause(c["clause_id"], c["source"], float(c["similarity"]))
            for c in obj["clauses"]
        ],
        explanation=obj["explanation"],
        generator=obj["generator"],
    )


@dataclass
class MonitorResult:
    alerts: list[Alert]
    scores: dict[str, float] = field(repr=False)
    transactions: int = 0
    elapsed_seconds: float = 0.0

    @property
    def tx_per_second(self) -> float:
        if self.elapsed_seconds <= 0.0:
            return 0.0
        return self.transactions / self.elapsed_seconds


class Monitor:
    """Single-writer streaming state; one instance per stream or session."""

    def __init__(
        self,
        config: PipelineConfig,
        bundle: ModelBundle,
        embedder: Embedder,
        index: ClauseIndex,
    ):
        if bundle.dims.embed_dim != embedder.dimension or embedder.dimension != index.dimension:
            raise DimensionMismatchError(
                "dimension mismatch: model embed_dim "
                f"{bundle.dims.embed_dim}, embedder {embedder.dimension}, "
                f"clause index {index.dimension}"
            )
        self.config = config
        self.bundle = bundle
        self.embedder = embedder
        self.index = index
        self.graph = TransactionGraph(
            decay=DecayParams(config.alpha), horizon=config.window_horizon
        )
        self.betweenness: dict[str, float] = {}
        self._bet_slots = np.zeros(self.graph.capacity)
        self.thresholds = FlagThresholds()
        try:
            fallback = embedder.embed_normalized(FALLBACK_QUERY_TEXT)
        except Exception:
            fallback = None  # external tables may not carry the fallback text
        if fallback is None:
            fallback = np.full(embedder.dimension, 1.0 / np.sqrt(embedder.dimension))
        self._fallback_query = fallback
        self.inserted = 0
        self.next_seq = 1
        self.alerts: list[Alert] = []
        self.scores: dict[str, float] = {}

    def refresh_structural_state(self) -> None:
        """Recompute betweenness and flag thresholds on the current window."""
        if self.graph.n_nodes == 0:
            self.betweenness = {}
            self._bet_slots = np.zeros(self.graph.capacity)
            self.thresholds = FlagThresholds()
            return
        self.betweenness = betweenness_all(
            self.graph, sample_sources=self.config.betweenness_samples
        )
        self._bet_slots = betweenness_by_slot(self.graph, self.betweenness)
        self.thresholds = thresholds_from_graph(
            self.graph, self.betweenness, self.config.flag_percentile
        )

    def process(self, tx: Transaction) -> tuple[float, Alert | None]:
        """Run the full per-transaction pipeline; returns (score, alert or None)."""
        embedding = self.embedder.embed_normalized(tx.narrative) if tx.narrative else None
        self.graph.insert_transaction(tx, embedding)
        self.graph.prune_window()
        self.inserted += 1
        if self.inserted % self.config.betweenness_interval == 0:
            self.refresh_structural_state()
        if self._bet_slots.size < self.graph.capacity:
            self._bet_slots = np.concatenate(
                [self._bet_slots, np.zeros(self.graph.capacity - self._bet_slots.size)]
            )

        features = self.graph.node_structural_features(tx.sender, self.betweenness)
        score = score_node_slots(self.bundle, self.graph, tx.sender, self._bet_slots)
        self.scores[tx.tx_id] = score

        alert = None
        if score > self.config.theta:
            alert = self._emit(tx, score, features)
        return score, alert

    def _emit(self, tx: Transaction, score: float, features) -> Alert:
        flags = structural_flags(features, self.thresholds)
        try:
            query = query_embedding(tx, features, self.embedder, flags=flags)
        except EmptyQueryError:
            query = self._fallback_query
        retrieved = query_top_k(self.index, query, self.config.top_k)
        ctx = AlertContext(
            transaction=tx,
            score=score,
            features=features,
            retrieved=retrieved,
            threshold=self.config.theta,
            flags=flags,
        )
        explanation = external_generate(self.config.external_generator, ctx)
        alert = Alert(
            seq=self.next_seq,
            tx_id=tx.tx_id,
            score=score,
            clauses=[AlertClause(c.clause_id, c.source, c.similarity) for c in retrieved],
            explanation=explanation.text,
            generator=explanation.generator,
        )
        self.next_seq += 1
        self.alerts.append(alert)
        return alert

    def run(self, source: Iterable[Transaction]) -> MonitorResult:
        start = time.perf_counter()
        count = 0
        for tx in source:
            self.process(tx)
            count += 1
        elapsed = time.perf_counter() - start
        return MonitorResult(
            alerts=list(self.alerts),
            scores=dict(self.scores),
            transactions=count,
            elapsed_seconds=elapsed,
        )


def run_monitor(
    config: PipelineConfig,
    source: Iterable[Transaction],
    bundle: ModelBundle,
    embedder: Embedder,
    index: ClauseIndex,
) -> list[Alert]:
    """Execute the whole stream and return the ordered alerts."""
    return Monitor(config, bundle, embedder, index).run(source).alerts


def emit_alerts(alerts: Iterable[Alert], sink: str | Path) -> int:
    """Write alerts as JSONL in emission order; returns the count written."""
    count = 0
    with open(sink, "w", encoding="utf-8") as fh:
        for alert in alerts:
            fh.write(alert.to_json())
            fh.write("\n")
            count += 1
        fh.flush()
    return count


def write_scores(scores: dict[str, float], sink: str | Path) -> int:
    """Write per-transaction scores as JSONL {"tx_id", "score"} lines."""
    count = 0
    with open(sink, "w", encoding="utf-8") as fh:
        for tx_id, score in scores.items():
            fh.write(json.dumps({"tx_id": tx_id, "score": score}))
            fh.write("\n")
            count += 1
    return count


def read_scores(path: str | Path) -> dict[str, float]:
    """Read scores from a scores file or an alerts file (both are JSONL)."""
    scores: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            scores[obj["tx_id"]] = float(obj["score"])
    return scores


def read_labels(path: str | Path) -> dict[str, int]:
    """Read binary labels from a transaction JSONL or {"tx_id","label"} JSONL.

    Unknown labels are skipped; licit maps to 0 and illicit to 1.
    """
    labels: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            label = obj.get("label")
            if label == "illicit" or label == 1:
                labels[obj["tx_id"]] = 1
            elif label == "licit" or label == 0:
                labels[obj["tx_id"]] = 0
    return labels
