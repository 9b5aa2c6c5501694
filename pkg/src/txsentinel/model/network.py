"""Structural encoder, fusion layer, and graph-convolution network.

All weights are plain float64 numpy arrays and every forward operation is
implemented directly; training (see ``training``) backpropagates through the
whole stack. The convolution rule aggregates each node's self-looped
undirected neighborhood with symmetric 1/sqrt(d_i d_j) normalization and
applies ReLU after every layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field

from ..errors import DimensionMismatchError
from ..graph.dynamic import NodeFeatures, TransactionGraph


class ModelDims(BaseModel):
    """Widths of every stage; defaults size the network for desk-scale data."""

    struct_in: int = Field(default=4, gt=0)
    struct_out: int = Field(default=16, gt=0)
    embed_dim: int = Field(default=64, gt=0)
    fused_dim: int = Field(default=32, gt=0)
    hidden_dim: int = Field(default=32, gt=0)
    n_layers: int = Field(default=3, gt=0)


@dataclass
class StructuralEncoder:
    """Affine map from the topological feature vector to the encoded vector."""

    weight: np.ndarray  # (struct_out, struct_in)
    bias: np.ndarray  # (struct_out,)

    def encode(self, x: np.ndarray) -> np.ndarray:
        """Exact affine map; accepts a single vector or an (N, struct_in) batch."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.weight.shape[1]:
            raise DimensionMismatchError(
                f"structural input width {x.shape[-1]} != {self.weight.shape[1]}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite structural features")
        return x @ self.weight.T + self.bias


@dataclass
class FusionLayer:
    """ReLU(affine(concat(encoded structural, normalized narrative)))."""

    weight: np.ndarray  # (fused_dim, struct_out + embed_dim)
    bias: np.ndarray  # (fused_dim,)

    def fuse(self, z: np.ndarray, e_hat: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        e_hat = np.asarray(e_hat, dtype=np.float64)
        combined = np.concatenate([z, e_hat], axis=-1)
        if combined.shape[-1] != self.weight.shape[1]:
            raise DimensionMismatchError(
                f"fusion input width {combined.shape[-1]} != {self.weight.shape[1]}"
            )
        return np.maximum(combined @ self.weight.T + self.bias, 0.0)


@dataclass
class GcnModel:
    """Stacked graph-convolution weights plus the sigmoid classifier head."""

    conv_weights: list[np.ndarray] = field(repr=False)  # [(H,F), (H,H), ...]
    cls_weight: np.ndarray = field(repr=False)  # (H,)
    cls_bias: np.ndarray = field(repr=False)  # (1,)


@dataclass
class ModelBundle:
    """Everything needed to score a node: encoder, fusion, GCN, classifier."""

    dims: ModelDims
    encoder: StructuralEncoder
    fusion: FusionLayer
    gcn: GcnModel

    def parameters(self) -> dict[str, np.ndarray]:
        """Named views of every trainable array; in-place edits train the model."""
        params = {
            "struct_weight": self.encoder.weight,
            "struct_bias": self.encoder.bias,
            "fusion_weight": self.fusion.weight,
            "fusion_bias": self.fusion.bias,
        }
        for i, w in enumerate(self.gcn.conv_weights):
            params[f"conv_{i}"] = w
        params["cls_weight"] = self.gcn.cls_weight
        params["cls_bias"] = self.gcn.cls_bias
        return params


def init_model(dims: ModelDims, seed: int = 0) -> ModelBundle:
    """Seeded initialization: weights uniform in ±1/sqrt(fan_in), zero biases."""
    rng = np.random.default_rng(seed)

    def uniform(rows: int, cols: int) -> np.ndarray:
        bound = 1.0 / math.sqrt(cols)
        return rng.uniform(-bound, bound, size=(rows, cols))

    encoder = StructuralEncoder(
        weight=uniform(dims.struct_out, dims.struct_in),
        bias=np.zeros(dims.struct_out),
    )
    fusion = FusionLayer(
        weight=uniform(dims.fused_dim, dims.struct_out + dims.embed_dim),
        bias=np.zeros(dims.fused_dim),
    )
    conv_weights = [uniform(dims.hidden_dim, dims.fused_dim)]
    for _ in range(dims.n_layers - 1):
        conv_weights.append(uniform(dims.hidden_dim, dims.hidden_dim))
    cls_weight = rng.uniform(
        -1.0 / math.sqrt(dims.hidden_dim), 1.0 / math.sqrt(dims.hidden_dim), size=dims.hidden_dim
    )
    gcn = GcnModel(conv_weights=conv_weights, cls_weight=cls_weight, cls_bias=np.zeros(1))
    return ModelBundle(dims=dims, encoder=encoder, fusion=fusion, gcn=gcn)


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    # clip keeps exp() finite; sigmoid saturates far inside +/-700 anyway
    return 1.0 / (1.0 + np.exp(-np.clip(x, -700.0, 700.0)))


_SCORE_FLOOR = 1e-12  # keeps scores strictly inside (0, 1) at float saturation


def classify(gcn: GcnModel, hidden: np.ndarray) -> float:
    """Suspicion score strictly in (0, 1) from a node's final hidden state."""
    hidden = np.asarray(hidden, dtype=np.float64)
    if hidden.shape[-1] != gcn.cls_weight.shape[0]:
        raise DimensionMismatchError(
            f"hidden width {hidden.shape[-1]} != classifier width {gcn.cls_weight.shape[0]}"
        )
    score = float(sigmoid(float(hidden @ gcn.cls_weight) + float(gcn.cls_bias[0])))
    return min(max(score, _SCORE_FLOOR), 1.0 - _SCORE_FLOOR)


# --------------------------------------------------------------------- views


@dataclass(frozen=True)
class GraphView:
    """Frozen, index-addressed adjacency for batch forward passes."""

    names: list[str]
    index: dict[str, int]
    adjacency: sp.csr_matrix = field(repr=False)  # self-looped, symmetric-normalized


def build_graph_view(graph: TransactionGraph) -> GraphView:
    """Collapse the live multigraph into the normalized convolution operator."""
    names = list(graph.nodes())
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    degrees = np.array([graph.convolution_degree(name) for name in names], dtype=np.float64)
    inv_sqrt = 1.0 / np.sqrt(degrees)

    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    for i, name in enumerate(names):
        hood = set(graph.undirected_neighbors(name))
        hood.add(name)
        for other in hood:
            j = index[other]
            rows.append(i)
            cols.append(j)
            data.append(inv_sqrt[i] * inv_sqrt[j])
    adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return GraphView(names=names, index=index, adjacency=adjacency)


def gcn_forward(
    gcn: GcnModel,
    view: GraphView,
    fused: np.ndarray,
    return_intermediates: bool = False,
):
    """Run every convolution layer over the whole view.

    ``fused`` is the (N, fused_dim) matrix of node inputs aligned with
    ``view.names``. Returns the (N, hidden_dim) final hidden states; with
    ``return_intermediates`` also the per-layer pre-activation and
    aggregated-input matrices needed for backpropagation.
    """
    fused = np.asarray(fused, dtype=np.float64)
    if fused.shape[0] != len(view.names):
        raise DimensionMismatchError("fused matrix rows != view size")
    if fused.shape[1] != gcn.conv_weights[0].shape[1]:
        raise DimensionMismatchError(
            f"fused width {fused.shape[1]} != layer-1 input {gcn.conv_weights[0].shape[1]}"
        )
    hidden = fused
    aggregated: list[np.ndarray] = []
    preact: list[np.ndarray] = []
    for weight in gcn.conv_weights:
        if weight.shape[1] != hidden.shape[1]:
            raise DimensionMismatchError("layer width mismatch")
        agg = view.adjacency @ hidden
        pre = agg @ weight.T
        hidden = np.maximum(pre, 0.0)
        if return_intermediates:
            aggregated.append(agg)
            preact.append(pre)
    if return_intermediates:
        return hidden, aggregated, preact
    return hidden


# ------------------------------------------------------------ feature inputs


def compress_features(features: NodeFeatures) -> np.ndarray:
    """log1p-compressed [in_degree, out_degree, betweenness, frequency].

    Raw betweenness spans orders of magnitude on hubby graphs; the monotone
    compression keeps the encoder's inputs in a trainable range.
    """
    return np.log1p(features.as_vector())


def betweenness_by_slot(graph: TransactionGraph, betweenness: dict[str, float]) -> np.ndarray:
    """Spread a betweenness map over the graph's slot space (absent nodes 0)."""
    arr = np.zeros(graph.capacity)
    for name, value in betweenness.items():
        slot = graph.try_index(name)
        if slot is not None:
            arr[slot] = value
    return arr


def score_node_slots(
    bundle: ModelBundle,
    graph: TransactionGraph,
    node: str,
    bet_by_slot: np.ndarray,
) -> float:
    """Score one node against the live graph via a localized forward pass.

    Only the node's L-hop neighborhood participates; global degrees are used
    for normalization, so the result equals the full-graph forward pass
    restricted to this node. Aggregation rows are materialized for nodes up
    to hop L-1 (deeper rows influence nothing), and the symmetric
    normalization is applied as two diagonal scalings around a plain
    structural sum, which keeps the whole pass in vectorized numpy.
    """
    n_layers = bundle.dims.n_layers
    target = graph.index_of(node)
    hops = {target: 0}
    order = [target]
    frontier = [target]
    for depth in range(1, n_layers + 1):
        nxt: list[int] = []
        for u in frontier:
            for v in graph.und_adjacency_of(u):
                if v not in hops:
                    hops[v] = depth
                    order.append(v)
                    nxt.append(v)
        frontier = nxt
    n = len(order)
    local = {slot: i for i, slot in enumerate(order)}
    n_rows = sum(1 for slot in order if hops[slot] < n_layers)  # BFS order: a prefix

    inv_sqrt = np.empty(n)
    cols: list[int] = []
    lengths = np.empty(n_rows, dtype=np.int64)
    for i, slot in enumerate(order):
        und = graph.und_adjacency_of(slot)
        inv_sqrt[i] = 1.0 / math.sqrt(len(und) if slot in und else len(und) + 1)
        if i < n_rows:
            row = [local[v] for v in und]
            if slot not in und:
                row.append(i)
            cols.extend(row)
            lengths[i] = len(row)
    col_idx = np.asarray(cols, dtype=np.int64)
    starts = np.zeros(n_rows, dtype=np.int64)
    np.cumsum(lengths[:-1], out=starts[1:])

    slots = np.fromiter(order, dtype=np.int64, count=n)
    raw = graph.feature_rows(slots, bet_by_slot)
    narratives = graph.narrative_rows(slots, bundle.dims.embed_dim)
    encoded = np.log1p(raw) @ bundle.encoder.weight.T + bundle.encoder.bias
    combined = np.concatenate([encoded, narratives], axis=1)
    hidden = np.maximum(combined @ bundle.fusion.weight.T + bundle.fusion.bias, 0.0)

    row_scale = inv_sqrt[:n_rows, None]
    for weight in bundle.gcn.conv_weights:
        scaled = inv_sqrt[:, None] * hidden
        summed = np.add.reduceat(scaled[col_idx], starts, axis=0)
        summed *= row_scale
        nxt_hidden = np.zeros((n, weight.shape[0]))
        nxt_hidden[:n_rows] = np.maximum(summed @ weight.T, 0.0)
        hidden = nxt_hidden
    return classify(bundle.gcn, hidden[0])


def score_node(
    bundle: ModelBundle,
    graph: TransactionGraph,
    node: str,
    betweenness: dict[str, float],
) -> float:
    """Score one node given a name-keyed betweenness map."""
    return score_node_slots(bundle, graph, node, betweenness_by_slot(graph, betweenness))
