"""Fusion GCN classifier: forward ops, training, checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .loss import SCORE_EPS, LossValue, bce_loss
from .narrative import batch_node_narratives, node_narrative
from .network import (
    FusionLayer,
    GcnModel,
    GraphView,
    ModelBundle,
    ModelDims,
    StructuralEncoder,
    betweenness_by_slot,
    build_graph_view,
    classify,
    compress_features,
    gcn_forward,
    init_model,
    score_node,
    score_node_slots,
    sigmoid,
)
from .training import (
    TrainConfig,
    TrainingData,
    TrainResult,
    backward_full,
    fit,
    forward_full,
    gradient_check,
    random_gradient_check,
    training_loss,
)

__all__ = [
    "SCORE_EPS",
    "FusionLayer",
    "GcnModel",
    "GraphView",
    "LossValue",
    "ModelBundle",
    "ModelDims",
    "StructuralEncoder",
    "TrainConfig",
    "TrainResult",
    "TrainingData",
    "backward_full",
    "batch_node_narratives",
    "betweenness_by_slot",
    "bce_loss",
    "build_graph_view",
    "classify",
    "compress_features",
    "fit",
    "forward_full",
    "gcn_forward",
    "gradient_check",
    "init_model",
    "load_checkpoint",
    "node_narrative",
    "random_gradient_check",
    "save_checkpoint",
    "score_node",
    "score_node_slots",
    "sigmoid",
    "training_loss",
]
