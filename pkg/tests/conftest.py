"""Shared fixtures and small graph/transaction builders."""

from __future__ import annotations

import pytest

from txsentinel.embed import HashingEmbedder
from txsentinel.graph import DecayParams, TransactionGraph
from txsentinel.ingest import SyntheticConfig, Transaction

# the seeded planted-pattern benchmark used by the acceptance suite
BENCHMARK_SYNTH = SyntheticConfig(
    n_transactions=5000,
    illicit_fraction=0.2,
    seed=20_240_601,
    n_licit_accounts=2000,
)


def tx(
    tx_id: str,
    sender: str,
    receiver: str,
    amount: float = 1.0,
    timestamp: int = 0,
    narrative: str = "",
) -> Transaction:
    return Transaction(tx_id, sender, receiver, amount, timestamp, narrative)


def build_graph(edges, alpha: float = 0.0, horizon: float | None = None) -> TransactionGraph:
    """Graph from (src, dst) or (src, dst, timestamp) tuples."""
    graph = TransactionGraph(decay=DecayParams(alpha), horizon=horizon)
    for i, spec in enumerate(edges):
        src, dst, ts = (spec if len(spec) == 3 else (*spec, 0))
        graph.insert_transaction(tx(f"e{i}", src, dst, timestamp=ts))
    return graph


@pytest.fixture(scope="session")
def embedder() -> HashingEmbedder:
    return HashingEmbedder(dimension=64)
