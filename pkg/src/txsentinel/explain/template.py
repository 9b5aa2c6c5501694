"""Deterministic, clause-grounded explanation rendering.

The template path is the default generator: a fixed layout filled from the
alert context, byte-identical for identical inputs, citing each retrieved
clause exactly once in descending-similarity order. Citations use
``[clause_id]`` markers so grounding can be checked mechanically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import NoGroundingError
from ..graph.dynamic import NodeFeatures
from ..ingest.transactions import Transaction
from ..retrieval.index import RetrievedClause

CITATION_RE = re.compile(r"\[([^\[\]\s]+)\]")


@dataclass(frozen=True)
class AlertContext:
    """Everything known about a flagged transaction at explanation time."""

    transaction: Transaction
    score: float
    features: NodeFeatures
    retrieved: list[RetrievedClause]
    threshold: float
    flags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.score > self.threshold:
            raise ValueError(
                f"alert context requires score > threshold, got {self.score} <= {self.threshold}"
            )


@dataclass(frozen=True)
class Explanation:
    text: str
    cited_clause_ids: list[str]
    generator: str  # "template" | "external"


def cited_ids(text: str) -> list[str]:
    """Clause ids cited via [id] markers, in order of first appearance."""
    seen: list[str] = []
    for match in CITATION_RE.findall(text):
        if match not in seen:
            seen.append(match)
    return seen


def render_explanation(ctx: AlertContext) -> Explanation:
    """Fill the fixed explanation template from the alert context."""
    if not ctx.retrieved:
        raise NoGroundingError("no grounding clauses: retrieval result is empty")
    tx = ctx.transaction
    flags = ", ".join(ctx.flags) if ctx.flags else "none observed"
    lines = [
        f"Transaction {tx.tx_id}: {tx.sender} -> {tx.receiver}, "
        f"amount {tx.amount:.2f}, at time {tx.timestamp}.",
        f"Suspicion score {ctx.score:.6f} exceeded the alert threshold {ctx.threshold:.6f}.",
        f"Structural red flags for sender {tx.sender}: {flags}.",
        "Retrieved regulatory grounds, most similar first:",
    ]
    for rank, clause in enumerate(ctx.retrieved, start=1):
        lines.append(
            f"{rank}. [{clause.clause_id}] ({clause.source}; "
            f"similarity={clause.similarity:.4f}) \"{clause.text}\""
        )
    text = "\n".join(lines)
    return Explanation(
        text=text,
        cited_clause_ids=[c.clause_id for c in ctx.retrieved],
        generator="template",
    )
