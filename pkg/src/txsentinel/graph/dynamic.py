"""Dynamic directed transaction multigraph with temporal decay.

The graph is a single-writer structure: ``insert_transaction`` and
``prune_window`` mutate state, every other accessor is a pure read and safe
to run concurrently with other reads. Running statistics (degrees, decayed
transaction frequency, decayed incoming-narrative aggregates) are maintained
incrementally; decayed quantities are stored at each node's last write time
and re-based on read, so reads never mutate.

Storage is columnar: nodes live in stable integer slots backing numpy
arrays, so the scoring hot path can gather whole neighborhoods with fancy
indexing instead of per-node Python calls. Slots of pruned nodes are
recycled.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from ..errors import (
    DimensionMismatchError,
    FutureTransactionError,
    StaleTransactionError,
    UnknownNodeError,
)
from ..ingest.transactions import Transaction

_INITIAL_CAPACITY = 256


@dataclass(frozen=True)
class DecayParams:
    """Exponential age-decay rate, per second."""

    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("decay rate alpha must be >= 0")


def decay_weight(params: DecayParams, tau_now: int | float, tau_tx: int | float) -> float:
    """Weight of a transaction of age ``tau_now - tau_tx``: exp(-alpha * age)."""
    if tau_now < tau_tx:
        raise FutureTransactionError(
            f"future transaction: tau_tx={tau_tx} is after tau_now={tau_now}"
        )
    if params.alpha == 0.0:
        return 1.0
    return math.exp(-params.alpha * (tau_now - tau_tx))


@dataclass(frozen=True)
class NodeFeatures:
    """Topological feature vector of one node: degrees, betweenness, frequency."""

    in_degree: int
    out_degree: int
    betweenness: float
    frequency: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.in_degree, self.out_degree, self.betweenness, self.frequency],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class Edge:
    edge_id: int
    src: str
    dst: str
    amount: float
    timestamp: int
    narrative: str
    embedding: np.ndarray | None  # normalized narrative embedding, None when absent


class TransactionGraph:
    """Directed temporal multigraph over entity ids.

    ``horizon`` bounds edge age in seconds (None = unbounded); ``prune_window``
    drops everything older. Multi-edges are kept individually; the collapsed
    simple view is exposed for path-based computations. ``embed_dim`` sizes
    the per-node narrative aggregate arrays (it may also be inferred from the
    first embedded insert).
    """

    def __init__(
        self,
        decay: DecayParams | None = None,
        horizon: float | None = None,
        embed_dim: int | None = None,
    ):
        self.decay = decay or DecayParams(0.0)
        self.horizon = math.inf if horizon is None else float(horizon)
        if self.horizon <= 0:
            raise ValueError("window horizon must be positive")
        self.now = 0

        self._index: dict[str, int] = {}
        self._free: list[int] = []
        self._capacity = _INITIAL_CAPACITY
        self._names: list[str | None] = [None] * self._capacity
        # directed and union simple views, keyed by slot -> {slot: multiplicity}
        self._out: list[dict[int, int]] = [{} for _ in range(self._capacity)]
        self._in: list[dict[int, int]] = [{} for _ in range(self._capacity)]
        self._und: list[dict[int, int]] = [{} for _ in range(self._capacity)]

        self._in_deg = np.zeros(self._capacity, dtype=np.int64)
        self._out_deg = np.zeros(self._capacity, dtype=np.int64)
        self._freq = np.zeros(self._capacity)
        self._last_eval = np.zeros(self._capacity)
        self._created = np.zeros(self._capacity)
        self._narr_weight = np.zeros(self._capacity)
        self._narr_count = np.zeros(self._capacity, dtype=np.int64)
        self._embed_dim = embed_dim
        self._narr_sum: np.ndarray | None = (
            np.zeros((self._capacity, embed_dim)) if embed_dim else None
        )
        self._narr_hat: np.ndarray | None = (
            np.zeros((self._capacity, embed_dim)) if embed_dim else None
        )

        self._edges: dict[int, Edge] = {}
        self._age_heap: list[tuple[int, int]] = []  # (timestamp, edge_id)
        self._next_edge_id = 0

    # ------------------------------------------------------------------ size

    @property
    def n_nodes(self) -> int:
        return len(self._index)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    @property
    def embed_dim(self) -> int | None:
        return self._embed_dim

    def __contains__(self, node: str) -> bool:
        return node in self._index

    def nodes(self) -> Iterator[str]:
        return iter(self._index)

    def edges(self) -> Iterator[Edge]:
        return iter(self._edges.values())

    # ------------------------------------------------------------- allocation

    def _grow(self) -> None:
        old = self._capacity
        self._capacity = old * 2
        self._names.extend([None] * old)
        self._out.extend({} for _ in range(old))
        self._in.extend({} for _ in range(old))
        self._und.extend({} for _ in range(old))
        for name in (
            "_in_deg",
            "_out_deg",
            "_freq",
            "_last_eval",
            "_created",
            "_narr_weight",
            "_narr_count",
        ):
            arr = getattr(self, name)
            setattr(self, name, np.concatenate([arr, np.zeros(old, dtype=arr.dtype)]))
        if self._narr_sum is not None:
            pad = np.zeros((old, self._narr_sum.shape[1]))
            self._narr_sum = np.concatenate([self._narr_sum, pad])
            self._narr_hat = np.concatenate([self._narr_hat, pad.copy()])

    def _alloc_narrative_arrays(self, dim: int) -> None:
        if self._embed_dim is not None and self._embed_dim != dim:
            raise DimensionMismatchError(
                f"narrative embedding width {dim} != graph embed_dim {self._embed_dim}"
            )
        if self._narr_sum is None:
            self._embed_dim = dim
            self._narr_sum = np.zeros((self._capacity, dim))
            self._narr_hat = np.zeros((self._capacity, dim))

    def ensure_node(self, node: str) -> int:
        """Create an isolated node if absent; returns its slot index."""
        slot = self._index.get(node)
        if slot is not None:
            return slot
        if self._free:
            slot = self._free.pop()
        else:
            slot = len(self._index)
            while slot >= self._capacity:
                self._grow()
        self._index[node] = slot
        self._names[slot] = node
        self._in_deg[slot] = 0
        self._out_deg[slot] = 0
        self._freq[slot] = 0.0
        self._last_eval[slot] = self.now
        self._created[slot] = self.now
        self._narr_weight[slot] = 0.0
        self._narr_count[slot] = 0
        if self._narr_sum is not None:
            self._narr_sum[slot] = 0.0
            self._narr_hat[slot] = 0.0
        return slot

    def _slot(self, node: str) -> int:
        slot = self._index.get(node)
        if slot is None:
            raise UnknownNodeError(f"unknown node: {node}")
        return slot

    def index_of(self, node: str) -> int:
        """Stable slot index of a node (valid until the node is pruned)."""
        return self._slot(node)

    def try_index(self, node: str) -> int | None:
        return self._index.get(node)

    def name_of(self, slot: int) -> str:
        name = self._names[slot]
        if name is None:
            raise UnknownNodeError(f"no node in slot {slot}")
        return name

    # ----------------------------------------------------------------- writes

    def _rebase(self, slot: int) -> None:
        """Re-value a slot's decayed statistics at the current time (writer only)."""
        last = self._last_eval[slot]
        if last == self.now:
            return
        factor = decay_weight(self.decay, self.now, last)
        self._freq[slot] *= factor
        if self._narr_sum is not None:
            self._narr_sum[slot] *= factor
            self._narr_weight[slot] *= factor
        self._last_eval[slot] = self.now

    def _refresh_narr_hat(self, slot: int) -> None:
        weight = self._narr_weight[slot]
        if weight <= 0.0:
            self._narr_hat[slot] = 0.0
            return
        mean = self._narr_sum[slot] / weight
        norm = math.sqrt(float(mean @ mean))
        self._narr_hat[slot] = 0.0 if norm == 0.0 else mean / norm

    def insert_transaction(
        self, tx: Transaction, narrative_embedding: np.ndarray | None = None
    ) -> int:
        """Insert one transaction as a new multi-edge; returns its edge id.

        Late arrivals are accepted as long as they are inside the window
        horizon; anything older is rejected. ``narrative_embedding`` is the
        normalized embedding of ``tx.narrative`` (None when the narrative is
        empty or the caller does not track text).
        """
        if self.now - tx.timestamp > self.horizon:
            raise StaleTransactionError(
                f"stale transaction {tx.tx_id}: age {self.now - tx.timestamp}s "
                f"exceeds horizon {self.horizon}s"
            )
        self.now = max(self.now, tx.timestamp)
        s = self.ensure_node(tx.sender)
        r = self.ensure_node(tx.receiver)

        edge_id = self._next_edge_id
        self._next_edge_id += 1
        edge = Edge(
            edge_id=edge_id,
            src=tx.sender,
            dst=tx.receiver,
            amount=tx.amount,
            timestamp=tx.timestamp,
            narrative=tx.narrative,
            embedding=narrative_embedding,
        )
        self._edges[edge_id] = edge
        heapq.heappush(self._age_heap, (tx.timestamp, edge_id))

        self._out[s][r] = self._out[s].get(r, 0) + 1
        self._in[r][s] = self._in[r].get(s, 0) + 1
        self._und[s][r] = self._und[s].get(r, 0) + 1
        if s != r:
            self._und[r][s] = self._und[r].get(s, 0) + 1

        delta = decay_weight(self.decay, self.now, tx.timestamp)
        self._rebase(s)
        self._freq[s] += delta
        if r != s:
            self._rebase(r)
        self._freq[r] += delta
        self._out_deg[s] += 1
        self._in_deg[r] += 1
        if narrative_embedding is not None:
            self._alloc_narrative_arrays(narrative_embedding.shape[0])
            self._narr_sum[r] += delta * narrative_embedding
            self._narr_weight[r] += delta
            self._narr_count[r] += 1
            self._refresh_narr_hat(r)
        return edge_id

    def prune_window(self) -> int:
        """Drop edges older than the horizon and now-isolated nodes; returns edge count removed."""
        removed = 0
        cutoff = self.now - self.horizon
        touched: set[int] = set()
        while self._age_heap and self._age_heap[0][0] < cutoff:
            _, edge_id = heapq.heappop(self._age_heap)
            edge = self._edges.pop(edge_id)
            touched.update(self._remove_edge(edge))
            removed += 1
        for slot in touched:
            if self._in_deg[slot] == 0 and self._out_deg[slot] == 0:
                name = self._names[slot]
                del self._index[name]
                self._names[slot] = None
                self._free.append(slot)
        return removed

    def _remove_edge(self, edge: Edge) -> tuple[int, int]:
        s = self._index[edge.src]
        r = self._index[edge.dst]
        for adj, a, b in ((self._out, s, r), (self._in, r, s), (self._und, s, r)):
            adj[a][b] -= 1
            if adj[a][b] == 0:
                del adj[a][b]
        if s != r:
            self._und[r][s] -= 1
            if self._und[r][s] == 0:
                del self._und[r][s]

        delta = decay_weight(self.decay, self.now, edge.timestamp)
        self._rebase(s)
        self._freq[s] = max(0.0, self._freq[s] - delta)
        if r != s:
            self._rebase(r)
        self._freq[r] = max(0.0, self._freq[r] - delta)
        self._out_deg[s] -= 1
        self._in_deg[r] -= 1
        if edge.embedding is not None and self._narr_sum is not None:
            self._narr_count[r] -= 1
            if self._narr_count[r] <= 0:
                # exact reset: float residue must not survive normalization
                self._narr_sum[r] = 0.0
                self._narr_weight[r] = 0.0
            else:
                self._narr_sum[r] -= delta * edge.embedding
                self._narr_weight[r] = max(0.0, self._narr_weight[r] - delta)
            self._refresh_narr_hat(r)
        return s, r

    # ------------------------------------------------------------------ reads

    def in_degree(self, node: str) -> int:
        return int(self._in_deg[self._slot(node)])

    def out_degree(self, node: str) -> int:
        return int(self._out_deg[self._slot(node)])

    def frequency(self, node: str) -> float:
        """Decay-weighted incident-transaction count at the current time."""
        slot = self._slot(node)
        factor = decay_weight(self.decay, self.now, self._last_eval[slot])
        return float(self._freq[slot]) * factor

    def narrative_aggregate(self, node: str) -> tuple[np.ndarray | None, float]:
        """Decayed (sum, weight) of normalized incoming narrative embeddings."""
        slot = self._slot(node)
        if self._narr_sum is None or self._narr_weight[slot] <= 0.0:
            return None, 0.0
        factor = decay_weight(self.decay, self.now, self._last_eval[slot])
        return self._narr_sum[slot] * factor, float(self._narr_weight[slot]) * factor

    def narrative_unit(self, node: str) -> np.ndarray:
        """Normalized decay-weighted mean of incoming narrative embeddings.

        The zero vector marks nodes with no embedded incoming narratives.
        """
        slot = self._slot(node)
        if self._narr_hat is None:
            if self._embed_dim is None:
                raise DimensionMismatchError("graph has no narrative embedding dimension")
            return np.zeros(self._embed_dim)
        return self._narr_hat[slot].copy()

    def simple_successors(self, node: str) -> Iterator[str]:
        for slot in self._out[self._slot(node)]:
            yield self._names[slot]

    def simple_predecessors(self, node: str) -> Iterator[str]:
        for slot in self._in[self._slot(node)]:
            yield self._names[slot]

    def undirected_neighbors(self, node: str) -> Iterator[str]:
        """Distinct in- or out-neighbors on the collapsed simple view (may include the node itself)."""
        for slot in self._und[self._slot(node)]:
            yield self._names[slot]

    def convolution_degree(self, node: str) -> int:
        """Size of the self-looped aggregation neighborhood: |N(i) ∪ {i}|."""
        slot = self._slot(node)
        und = self._und[slot]
        return len(und) if slot in und else len(und) + 1

    def multiplicity(self, src: str, dst: str) -> int:
        s = self._index.get(src)
        d = self._index.get(dst)
        if s is None or d is None:
            return 0
        return self._out[s].get(d, 0)

    def in_edges(self, node: str) -> Iterator[Edge]:
        for edge in self._edges.values():
            if edge.dst == node:
                yield edge

    def out_edges(self, node: str) -> Iterator[Edge]:
        for edge in self._edges.values():
            if edge.src == node:
                yield edge

    def node_structural_features(self, node: str, betweenness: dict[str, float]) -> NodeFeatures:
        """Feature vector [in_degree, out_degree, betweenness, frequency].

        ``betweenness`` is the most recent centrality map; nodes created after
        that computation default to 0.
        """
        slot = self._slot(node)
        factor = decay_weight(self.decay, self.now, self._last_eval[slot])
        return NodeFeatures(
            in_degree=int(self._in_deg[slot]),
            out_degree=int(self._out_deg[slot]),
            betweenness=betweenness.get(node, 0.0),
            frequency=float(self._freq[slot]) * factor,
        )

    # ------------------------------------------------------- batch-read views

    def und_adjacency_of(self, slot: int) -> dict[int, int]:
        """Slot-indexed union adjacency of one node (read-only view)."""
        return self._und[slot]

    def convolution_degree_slot(self, slot: int) -> int:
        und = self._und[slot]
        return len(und) if slot in und else len(und) + 1

    def feature_rows(self, slots: np.ndarray, betweenness_by_slot: np.ndarray) -> np.ndarray:
        """(n, 4) raw feature matrix for the given slots, vectorized.

        ``betweenness_by_slot`` is a capacity-sized array aligned with slots
        (see ``Monitor.refresh_structural_state``).
        """
        raw = np.empty((slots.size, 4))
        raw[:, 0] = self._in_deg[slots]
        raw[:, 1] = self._out_deg[slots]
        raw[:, 2] = betweenness_by_slot[slots]
        if self.decay.alpha == 0.0:
            raw[:, 3] = self._freq[slots]
        else:
            raw[:, 3] = self._freq[slots] * np.exp(
                -self.decay.alpha * (self.now - self._last_eval[slots])
            )
        return raw

    def narrative_rows(self, slots: np.ndarray, embed_dim: int) -> np.ndarray:
        """(n, embed_dim) normalized narrative means for the given slots."""
        if self._narr_hat is None:
            return np.zeros((slots.size, embed_dim))
        if self._narr_hat.shape[1] != embed_dim:
            raise DimensionMismatchError(
                f"graph embed_dim {self._narr_hat.shape[1]} != requested {embed_dim}"
            )
        return self._narr_hat[slots]

    @property
    def capacity(self) -> int:
        return self._capacity

    def live_slots(self) -> np.ndarray:
        return np.fromiter(self._index.values(), dtype=np.int64, count=len(self._index))

    def degree_freq_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(in_deg, out_deg, freq) over live slots, for threshold percentiles."""
        slots = self.live_slots()
        if self.decay.alpha == 0.0:
            freq = self._freq[slots]
        else:
            freq = self._freq[slots] * np.exp(
                -self.decay.alpha * (self.now - self._last_eval[slots])
            )
        return self._in_deg[slots], self._out_deg[slots], freq

    # ----------------------------------------------------------------- export

    def export_snapshot(self, betweenness: dict[str, float] | None = None) -> dict:
        """JSON-ready snapshot of nodes (with features) and edges (with decay weights)."""
        bet = betweenness if betweenness is not None else {}
        nodes = [
            {
                "id": node,
                "features": self.node_structural_features(node, bet).as_vector().tolist(),
            }
            for node in sorted(self._index)
        ]
        edges = [
            {
                "src": e.src,
                "dst": e.dst,
                "amount": e.amount,
                "timestamp": e.timestamp,
                "delta": decay_weight(self.decay, self.now, e.timestamp),
            }
            for e in sorted(self._edges.values(), key=lambda e: e.edge_id)
        ]
        return {"nodes": nodes, "edges": edges}

    def write_snapshot(self, path: str | Path, betweenness: dict[str, float] | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.export_snapshot(betweenness), fh, indent=2)
