"""Pydantic request/response models for the HTTP API and the thin CLI client."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..ingest.synthetic import SyntheticConfig
from ..ingest.transactions import Label, Transaction
from ..pipeline.config import PipelineConfig
from ..pipeline.metrics import Metrics
from ..pipeline.monitor import Alert, AlertClause


class TransactionModel(BaseModel):
    tx_id: str = Field(min_length=1)
    sender: str = Field(min_length=1)
    receiver: str = Field(min_length=1)
    amount: float = Field(ge=0.0)
    timestamp: int = Field(ge=0)
    narrative: str = ""
    label: Literal["licit", "illicit", "unknown"] = "unknown"

    def to_transaction(self) -> Transaction:
        return Transaction(
            tx_id=self.tx_id,
            sender=self.sender,
            receiver=self.receiver,
            amount=self.amount,
            timestamp=self.timestamp,
            narrative=self.narrative,
            label=Label(self.label),
        )

    @classmethod
    def from_transaction(cls, tx: Transaction) -> "TransactionModel":
        return cls(**tx.to_dict())


class MetricsModel(BaseModel):
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    precision_defined: bool
    recall_defined: bool
    f1_defined: bool

    @classmethod
    def from_metrics(cls, metrics: Metrics) -> "MetricsModel":
        return cls(**metrics.to_dict())


class AlertClauseModel(BaseModel):
    clause_id: str
    source: str
    similarity: float


class AlertModel(BaseModel):
    seq: int
    tx_id: str
    score: float
    clauses: list[AlertClauseModel]
    explanation: str
    generator: Literal["template", "external"]

    @classmethod
    def from_alert(cls, alert: Alert) -> "AlertModel":
        return cls(
            seq=alert.seq,
            tx_id=alert.tx_id,
            score=alert.score,
            clauses=[
                AlertClauseModel(clause_id=c.clause_id, source=c.source, similarity=c.similarity)
                for c in alert.clauses
            ],
            explanation=alert.explanation,
            generator=alert.generator,
        )

    def to_alert(self) -> Alert:
        return Alert(
            seq=self.seq,
            tx_id=self.tx_id,
            score=self.score,
            clauses=[AlertClause(c.clause_id, c.source, c.similarity) for c in self.clauses],
            explanation=self.explanation,
            generator=self.generator,
        )


# ------------------------------------------------------------ batch lifecycle


class GenerateRequest(BaseModel):
    config: SyntheticConfig
    out_path: str | None = None


class GenerateResponse(BaseModel):
    count: int
    illicit_count: int
    out_path: str | None = None
    transactions: list[TransactionModel] | None = None
    config: SyntheticConfig


class TrainRequest(BaseModel):
    config: PipelineConfig = PipelineConfig()
    data_path: str
    checkpoint_out: str


class SplitInfo(BaseModel):
    train_count: int
    test_count: int
    boundary_timestamp: int


class TrainReport(BaseModel):
    checkpoint: str
    epochs: int
    loss_history: list[float]
    final_loss: float
    labeled_nodes: int
    train_metrics: MetricsModel
    split: SplitInfo
    config: PipelineConfig


class IndexRulesRequest(BaseModel):
    config: PipelineConfig = PipelineConfig()
    corpus_path: str
    index_out: str


class IndexRulesResponse(BaseModel):
    clause_count: int
    dimension: int
    index_out: str


class MonitorRequest(BaseModel):
    config: PipelineConfig = PipelineConfig()
    checkpoint: str
    rules: str
    stream_path: str
    alerts_out: str
    scores_out: str | None = None


class MonitorSummary(BaseModel):
    transactions: int
    alert_count: int
    elapsed_seconds: float
    tx_per_second: float
    alerts_out: str
    scores_out: str | None = None
    config: PipelineConfig


class EvaluateRequest(BaseModel):
    scores_path: str
    labels_path: str
    theta: float = Field(default=0.5, ge=0.0, le=1.0)


class EvaluateResponse(BaseModel):
    theta: float
    evaluated: int
    metrics: MetricsModel


class GradientCheckRequest(BaseModel):
    trials: int = Field(default=20, ge=1)
    seed: int = 0
    step: float = Field(default=1e-5, gt=0.0)
    tolerance: float = Field(default=1e-4, gt=0.0)


class GradientCheckResponse(BaseModel):
    trials: int
    seed: int
    step: float
    max_rel_error: float
    tolerance: float
    passed: bool


# -------------------------------------------------------- streaming sessions


class SessionCreateRequest(BaseModel):
    config: PipelineConfig = PipelineConfig()
    checkpoint: str
    rules: str


class SessionCreateResponse(BaseModel):
    session_id: str


class SessionTransactionsRequest(BaseModel):
    transactions: list[TransactionModel]


class TransactionScoreModel(BaseModel):
    tx_id: str
    score: float
    alerted: bool
    seq: int | None = None


class SessionTransactionsResponse(BaseModel):
    results: list[TransactionScoreModel]
    alerts: list[AlertModel]


class SessionAlertsResponse(BaseModel):
    alerts: list[AlertModel]


class SessionInfoResponse(BaseModel):
    session_id: str
    transactions: int
    alert_count: int
    graph_nodes: int
    graph_edges: int


class HealthResponse(BaseModel):
    status: str
    version: str
