"""Stream orchestration: config, split, monitor loop, training, metrics."""

from .config import EmbedderConfig, PipelineConfig, apply_overrides, build_embedder, load_config
from .metrics import Metrics, evaluate
from .monitor import (
    Alert,
    AlertClause,
    Monitor,
    MonitorResult,
    emit_alerts,
    parse_alert,
    read_labels,
    read_scores,
    run_monitor,
    write_scores,
)
from .split import SplitResult, chronological_split
from .train import (
    TrainOutcome,
    build_training_data,
    build_transaction_graph,
    node_labels_from_transactions,
    train_from_stream,
)

__all__ = [
    "Alert",
    "AlertClause",
    "EmbedderConfig",
    "Metrics",
    "Monitor",
    "MonitorResult",
    "PipelineConfig",
    "SplitResult",
    "TrainOutcome",
    "apply_overrides",
    "build_embedder",
    "build_training_data",
    "build_transaction_graph",
    "chronological_split",
    "emit_alerts",
    "evaluate",
    "load_config",
    "node_labels_from_transactions",
    "parse_alert",
    "read_labels",
    "read_scores",
    "run_monitor",
    "train_from_stream",
    "write_scores",
]
