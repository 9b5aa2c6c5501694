"""Dynamic transaction graph: streaming inserts, decay, pruning, centrality."""

from .betweenness import betweenness_all
from .dynamic import DecayParams, Edge, NodeFeatures, TransactionGraph, decay_weight

__all__ = [
    "DecayParams",
    "Edge",
    "NodeFeatures",
    "TransactionGraph",
    "betweenness_all",
    "decay_weight",
]
