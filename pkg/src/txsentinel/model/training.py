"""Full-stack training: forward, backpropagation, fitting, gradient checking.

Gradients flow from the weighted BCE loss through the classifier, every
convolution layer, the fusion layer, and the structural encoder. The
optimizer is full-batch gradient descent with optional classical momentum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from ..errors import DegenerateLabelsError
from .loss import SCORE_EPS, LossValue, bce_loss
from .network import GraphView, ModelBundle, ModelDims, gcn_forward, init_model, sigmoid


class TrainConfig(BaseModel):
    """Optimizer settings; the paper-side protocol leaves these to the implementation."""

    learning_rate: float = Field(default=1e-2, ge=0.0)
    epochs: int = Field(default=200, ge=0)
    pos_weight: float = Field(default=1.0, ge=1.0)
    seed: int = 0
    optimizer: Literal["momentum", "sgd"] = "momentum"
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)


@dataclass
class TrainingData:
    """Frozen snapshot the optimizer runs on: view, inputs, node labels."""

    view: GraphView
    features: np.ndarray = field(repr=False)  # (N, struct_in) compressed
    narratives: np.ndarray = field(repr=False)  # (N, embed_dim) normalized or zero
    labels: np.ndarray = field(repr=False)  # (N,) 0/1, meaningful where mask
    label_mask: np.ndarray = field(repr=False)  # (N,) bool

    def check_labels(self) -> None:
        labeled = self.labels[self.label_mask]
        if labeled.size == 0 or labeled.min() == labeled.max():
            raise DegenerateLabelsError(
                "degenerate labels: training needs at least one node of each class"
            )


@dataclass
class ForwardState:
    """Every intermediate needed to backpropagate one full-batch pass."""

    concat: np.ndarray
    fused_pre: np.ndarray
    fused: np.ndarray
    aggregated: list[np.ndarray]
    preact: list[np.ndarray]
    hidden: np.ndarray
    logits: np.ndarray
    scores: np.ndarray


def forward_full(bundle: ModelBundle, data: TrainingData) -> ForwardState:
    encoded = data.features @ bundle.encoder.weight.T + bundle.encoder.bias
    concat = np.concatenate([encoded, data.narratives], axis=1)
    fused_pre = concat @ bundle.fusion.weight.T + bundle.fusion.bias
    fused = np.maximum(fused_pre, 0.0)
    hidden, aggregated, preact = gcn_forward(
        bundle.gcn, data.view, fused, return_intermediates=True
    )
    logits = hidden @ bundle.gcn.cls_weight + bundle.gcn.cls_bias[0]
    scores = sigmoid(logits)
    return ForwardState(
        concat=concat,
        fused_pre=fused_pre,
        fused=fused,
        aggregated=aggregated,
        preact=preact,
        hidden=hidden,
        logits=logits,
        scores=scores,
    )


def training_loss(state: ForwardState, data: TrainingData, pos_weight: float) -> LossValue:
    return bce_loss(state.scores[data.label_mask], data.labels[data.label_mask], pos_weight)


def backward_full(
    bundle: ModelBundle,
    data: TrainingData,
    state: ForwardState,
    pos_weight: float,
) -> dict[str, np.ndarray]:
    """Analytic gradients for every parameter, keyed like ``bundle.parameters()``."""
    n_labeled = int(data.label_mask.sum())
    scores = state.scores
    clamped = np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS)

    # dL/d(score): mean over labeled examples; zero where clamped or unlabeled
    d_p = np.zeros_like(scores)
    y = data.labels
    mask = data.label_mask
    d_p[mask] = (-pos_weight * y[mask] / clamped[mask] + (1.0 - y[mask]) / (1.0 - clamped[mask])) / n_labeled
    inside = (scores > SCORE_EPS) & (scores < 1.0 - SCORE_EPS)
    d_logit = d_p * inside * scores * (1.0 - scores)

    grads: dict[str, np.ndarray] = {}
    grads["cls_weight"] = state.hidden.T @ d_logit
    grads["cls_bias"] = np.array([d_logit.sum()])

    d_hidden = np.outer(d_logit, bundle.gcn.cls_weight)
    adjacency = data.view.adjacency  # symmetric, so A.T @ x == A @ x
    for layer in range(len(bundle.gcn.conv_weights) - 1, -1, -1):
        d_pre = d_hidden * (state.preact[layer] > 0.0)
        grads[f"conv_{layer}"] = d_pre.T @ state.aggregated[layer]
        d_agg = d_pre @ bundle.gcn.conv_weights[layer]
        d_hidden = adjacency @ d_agg

    d_fused = d_hidden
    d_fused_pre = d_fused * (state.fused_pre > 0.0)
    grads["fusion_weight"] = d_fused_pre.T @ state.concat
    grads["fusion_bias"] = d_fused_pre.sum(axis=0)
    d_concat = d_fused_pre @ bundle.fusion.weight
    d_encoded = d_concat[:, : bundle.dims.struct_out]
    grads["struct_weight"] = d_encoded.T @ data.features
    grads["struct_bias"] = d_encoded.sum(axis=0)
    return grads


@dataclass
class TrainResult:
    """Loss trajectory: entry 0 is the initial loss, entry e the loss after e updates."""

    loss_history: list[float]

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]


def fit(bundle: ModelBundle, data: TrainingData, cfg: TrainConfig) -> TrainResult:
    """Train in place; deterministic for a fixed (bundle, data, config)."""
    data.check_labels()
    params = bundle.parameters()
    velocity = {name: np.zeros_like(p) for name, p in params.items()}
    mu = cfg.momentum if cfg.optimizer == "momentum" else 0.0

    history: list[float] = []
    for _ in range(cfg.epochs):
        state = forward_full(bundle, data)
        history.append(training_loss(state, data, cfg.pos_weight).value)
        grads = backward_full(bundle, data, state, cfg.pos_weight)
        for name, param in params.items():
            v = velocity[name]
            v *= mu
            v += grads[name]
            param -= cfg.learning_rate * v
    final_state = forward_full(bundle, data)
    history.append(training_loss(final_state, data, cfg.pos_weight).value)
    return TrainResult(loss_history=history)


# ------------------------------------------------------------- verification


def gradient_check(
    bundle: ModelBundle,
    data: TrainingData,
    pos_weight: float = 1.0,
    step: float = 1e-5,
) -> float:
    """Max relative error of analytic vs central finite-difference gradients.

    Relative error uses an absolute floor of 1e-6 so that near-zero gradient
    pairs are compared on absolute terms.
    """
    state = forward_full(bundle, data)
    analytic = backward_full(bundle, data, state, pos_weight)
    params = bundle.parameters()

    def loss_now() -> float:
        return training_loss(forward_full(bundle, data), data, pos_weight).value

    worst = 0.0
    for name, param in params.items():
        grad = analytic[name]
        flat = param.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = loss_now()
            flat[i] = original - step
            minus = loss_now()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * step)
            denom = max(abs(gflat[i]), abs(numeric), 1e-6)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return float(worst)


def _random_instance(seed: int) -> tuple[ModelBundle, TrainingData]:
    """Small random graph + model for a gradient-check trial (widths <= 8)."""
    from ..graph.dynamic import TransactionGraph
    from ..ingest.transactions import Transaction
    from .network import build_graph_view

    rng = np.random.default_rng(seed)
    dims = ModelDims(
        struct_in=4, struct_out=5, embed_dim=6, fused_dim=7, hidden_dim=8, n_layers=3
    )
    n = int(rng.integers(3, 7))
    graph = TransactionGraph()
    for i in range(n):
        graph.ensure_node(f"n{i}")
    k = 0
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < 0.45:
                graph.insert_transaction(
                    Transaction(f"t{k}", f"n{i}", f"n{j}", 1.0, 0, "")
                )
                k += 1
    view = build_graph_view(graph)

    bundle = init_model(dims, seed=seed)
    features = rng.normal(0.0, 1.0, size=(n, dims.struct_in))
    narratives = rng.normal(0.0, 1.0, size=(n, dims.embed_dim))
    narratives /= np.linalg.norm(narratives, axis=1, keepdims=True)
    labels = rng.integers(0, 2, size=n).astype(np.float64)
    if labels.min() == labels.max():
        labels[0] = 1.0 - labels[0]
    data = TrainingData(
        view=view,
        features=features,
        narratives=narratives,
        labels=labels,
        label_mask=np.ones(n, dtype=bool),
    )
    return bundle, data


def _relu_margin(bundle: ModelBundle, data: TrainingData) -> float:
    state = forward_full(bundle, data)
    margins = [np.abs(state.fused_pre).min()] + [np.abs(p).min() for p in state.preact]
    return float(min(margins))


def random_gradient_check(seed: int, step: float = 1e-5, kink_margin: float = 1e-3) -> float:
    """One seeded gradient-check trial, resampled away from ReLU kinks."""
    for attempt in range(64):
        bundle, data = _random_instance(seed * 1009 + attempt)
        if _relu_margin(bundle, data) > kink_margin:
            return gradient_check(bundle, data, step=step)
    raise RuntimeError(f"could not find a kink-free instance for seed {seed}")
