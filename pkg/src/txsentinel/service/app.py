"""FastAPI application: batch lifecycle endpoints plus streaming monitor sessions.

Sessions wrap a live :class:`Monitor` for true multi-client, long-running
use: create one with a trained checkpoint and a rules index, then POST
transaction batches and poll alerts. Session mutation is serialized per
session (the graph is single-writer).
"""

from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import TxSentinelError
from ..model.checkpoint import load_checkpoint
from ..pipeline.config import build_embedder
from ..pipeline.monitor import Monitor
from ..retrieval.index import load_index
from . import handlers
from .schemas import (
    AlertModel,
    EvaluateRequest,
    EvaluateResponse,
    GenerateRequest,
    GenerateResponse,
    GradientCheckRequest,
    GradientCheckResponse,
    HealthResponse,
    IndexRulesRequest,
    IndexRulesResponse,
    MonitorRequest,
    MonitorSummary,
    SessionAlertsResponse,
    SessionCreateRequest,
    SessionCreateResponse,
    SessionInfoResponse,
    SessionTransactionsRequest,
    SessionTransactionsResponse,
    TrainReport,
    TrainRequest,
    TransactionScoreModel,
)


class _Session:
    def __init__(self, monitor: Monitor):
        self.monitor = monitor
        self.lock = threading.Lock()
        self.transactions = 0


def create_app() -> FastAPI:
    app = FastAPI(title="txsentinel", version=__version__)
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(TxSentinelError)
    async def _domain_error(_, exc: TxSentinelError):
        raise HTTPException(status_code=400, detail=str(exc))

    def _wrap(func, request):
        try:
            return func(request)
        except TxSentinelError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        return _wrap(handlers.handle_generate, request)

    @app.post("/v1/train", response_model=TrainReport)
    def train(request: TrainRequest) -> TrainReport:
        return _wrap(handlers.handle_train, request)

    @app.post("/v1/index-rules", response_model=IndexRulesResponse)
    def index_rules(request: IndexRulesRequest) -> IndexRulesResponse:
        return _wrap(handlers.handle_index_rules, request)

    @app.post("/v1/monitor", response_model=MonitorSummary)
    def monitor(request: MonitorRequest) -> MonitorSummary:
        return _wrap(handlers.handle_monitor, request)

    @app.post("/v1/evaluate", response_model=EvaluateResponse)
    def evaluate(request: EvaluateRequest) -> EvaluateResponse:
        return _wrap(handlers.handle_evaluate, request)

    @app.post("/v1/gradient-check", response_model=GradientCheckResponse)
    def gradient_check(request: GradientCheckRequest) -> GradientCheckResponse:
        return _wrap(handlers.handle_gradient_check, request)

    # ---------------------------------------------------------------- sessions

    def _get_session(session_id: str) -> _Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session: {session_id}")
        return session

    @app.post("/v1/sessions", response_model=SessionCreateResponse)
    def create_session(request: SessionCreateRequest) -> SessionCreateResponse:
        def build(req: SessionCreateRequest) -> Monitor:
            embedder = build_embedder(req.config)
            bundle = load_checkpoint(req.checkpoint)
            index = load_index(req.rules)
            return Monitor(req.config, bundle, embedder, index)

        monitor = _wrap(build, request)
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = _Session(monitor)
        return SessionCreateResponse(session_id=session_id)

    @app.post("/v1/sessions/{session_id}/transactions", response_model=SessionTransactionsResponse)
    def session_transactions(
        session_id: str, request: SessionTransactionsRequest
    ) -> SessionTransactionsResponse:
        session = _get_session(session_id)
        results: list[TransactionScoreModel] = []
        new_alerts: list[AlertModel] = []
        with session.lock:
            for model in request.transactions:
                tx = model.to_transaction()
                try:
                    score, alert = session.monitor.process(tx)
                except TxSentinelError as exc:
                    raise HTTPException(status_code=400, detail=str(exc)) from exc
                session.transactions += 1
                results.append(
                    TransactionScoreModel(
                        tx_id=tx.tx_id,
                        score=score,
                        alerted=alert is not None,
                        seq=alert.seq if alert else None,
                    )
                )
                if alert:
                    new_alerts.append(AlertModel.from_alert(alert))
        return SessionTransactionsResponse(results=results, alerts=new_alerts)

    @app.get("/v1/sessions/{session_id}/alerts", response_model=SessionAlertsResponse)
    def session_alerts(session_id: str, since_seq: int = 0) -> SessionAlertsResponse:
        session = _get_session(session_id)
        with session.lock:
            alerts = [a for a in session.monitor.alerts if a.seq > since_seq]
        return SessionAlertsResponse(alerts=[AlertModel.from_alert(a) for a in alerts])

    @app.get("/v1/sessions/{session_id}", response_model=SessionInfoResponse)
    def session_info(session_id: str) -> SessionInfoResponse:
        session = _get_session(session_id)
        with session.lock:
            return SessionInfoResponse(
                session_id=session_id,
                transactions=session.transactions,
                alert_count=len(session.monitor.alerts),
                graph_nodes=session.monitor.graph.n_nodes,
                graph_edges=session.monitor.graph.n_edges,
            )

    @app.delete("/v1/sessions/{session_id}")
    def delete_session(session_id: str) -> dict:
        with registry_lock:
            if session_id not in sessions:
                raise HTTPException(status_code=404, detail=f"unknown session: {session_id}")
            del sessions[session_id]
        return {"deleted": session_id}

    return app


app = create_app()
