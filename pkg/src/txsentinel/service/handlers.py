"""Service operations behind the HTTP endpoints.

Each handler is a plain function from request model to response model; the
FastAPI app and the CLI both call these, so the wire contract and the local
path cannot drift apart.
"""

from __future__ import annotations

from ..ingest.synthetic import generate_synthetic
from ..ingest.transactions import Label, read_jsonl, write_jsonl
from ..model.checkpoint import load_checkpoint, save_checkpoint
from ..model.training import random_gradient_check
from ..pipeline.config import build_embedder
from ..pipeline.metrics import evaluate
from ..pipeline.monitor import Monitor, emit_alerts, read_labels, read_scores, write_scores
from ..pipeline.train import train_from_stream
from ..retrieval.index import build_index, load_corpus, load_index, save_index
from .schemas import (
    EvaluateRequest,
    EvaluateResponse,
    GenerateRequest,
    GenerateResponse,
    GradientCheckRequest,
    GradientCheckResponse,
    IndexRulesRequest,
    IndexRulesResponse,
    MetricsModel,
    MonitorRequest,
    MonitorSummary,
    SplitInfo,
    TrainReport,
    TrainRequest,
    TransactionModel,
)


def handle_generate(request: GenerateRequest) -> GenerateResponse:
    stream = generate_synthetic(request.config)
    illicit = sum(1 for tx in stream if tx.label is Label.ILLICIT)
    if request.out_path:
        write_jsonl(stream, request.out_path)
        return GenerateResponse(
            count=len(stream),
            illicit_count=illicit,
            out_path=request.out_path,
            config=request.config,
        )
    return GenerateResponse(
        count=len(stream),
        illicit_count=illicit,
        transactions=[TransactionModel.from_transaction(tx) for tx in stream],
        config=request.config,
    )


def handle_train(request: TrainRequest) -> TrainReport:
    config = request.config
    embedder = build_embedder(config)
    transactions = list(read_jsonl(request.data_path))
    outcome = train_from_stream(config, transactions, embedder)
    save_checkpoint(outcome.bundle, request.checkpoint_out)
    return TrainReport(
        checkpoint=request.checkpoint_out,
        epochs=config.train.epochs,
        loss_history=outcome.result.loss_history,
        final_loss=outcome.result.final_loss,
        labeled_nodes=outcome.labeled_nodes,
        train_metrics=MetricsModel.from_metrics(outcome.train_metrics),
        split=SplitInfo(
            train_count=len(outcome.split.train),
            test_count=len(outcome.split.test),
            boundary_timestamp=outcome.split.boundary_timestamp,
        ),
        config=config,
    )


def handle_index_rules(request: IndexRulesRequest) -> IndexRulesResponse:
    embedder = build_embedder(request.config)
    corpus = load_corpus(request.corpus_path)
    index = build_index(corpus, embedder)
    save_index(index, request.index_out)
    return IndexRulesResponse(
        clause_count=index.size, dimension=index.dimension, index_out=request.index_out
    )


def handle_monitor(request: MonitorRequest) -> MonitorSummary:
    config = request.config
    embedder = build_embedder(config)
    bundle = load_checkpoint(request.checkpoint)
    index = load_index(request.rules)
    monitor = Monitor(config, bundle, embedder, index)  # fails fast on width mismatch
    result = monitor.run(read_jsonl(request.stream_path))
    emit_alerts(result.alerts, request.alerts_out)
    if request.scores_out:
        write_scores(result.scores, request.scores_out)
    return MonitorSummary(
        transactions=result.transactions,
        alert_count=len(result.alerts),
        elapsed_seconds=result.elapsed_seconds,
        tx_per_second=result.tx_per_second,
        alerts_out=request.alerts_out,
        scores_out=request.scores_out,
        config=config,
    )


def handle_evaluate(request: EvaluateRequest) -> EvaluateResponse:
    scores = read_scores(request.scores_path)
    labels = read_labels(request.labels_path)
    if not labels:
        raise ValueError(f"no usable labels in {request.labels_path}")
    # transactions never flagged (absent from an alerts file) count as negatives
    predictions = {tx_id: scores.get(tx_id, float("-inf")) for tx_id in labels}
    metrics = evaluate(predictions, labels, request.theta)
    return EvaluateResponse(
        theta=request.theta,
        evaluated=len(labels),
        metrics=MetricsModel.from_metrics(metrics),
    )


def handle_gradient_check(request: GradientCheckRequest) -> GradientCheckResponse:
    worst = 0.0
    for trial in range(request.trials):
        worst = max(worst, random_gradient_check(request.seed + trial, step=request.step))
    return GradientCheckResponse(
        trials=request.trials,
        seed=request.seed,
        step=request.step,
        max_rel_error=worst,
        tolerance=request.tolerance,
        passed=worst < request.tolerance,
    )
