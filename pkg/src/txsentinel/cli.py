"""Command-line client for the monitoring service.

Every subcommand builds the same request model the HTTP API accepts and
either calls the service layer in-process (default) or POSTs it to a running
server (``--server http://host:port``). Machine-readable JSON goes to
stdout, diagnostics to stderr; exit code 0 means success.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx
from pydantic import BaseModel, ValidationError

from .errors import TxSentinelError
from .ingest.synthetic import SyntheticConfig
from .pipeline.config import apply_overrides, load_config
from .service import handlers
from .service.schemas import (
    EvaluateRequest,
    GenerateRequest,
    GradientCheckRequest,
    IndexRulesRequest,
    MonitorRequest,
    TrainRequest,
)

_REMOTE_TIMEOUT = 600.0


def _dispatch(args: argparse.Namespace, path: str, request: BaseModel, handler) -> dict:
    if args.server:
        url = args.server.rstrip("/") + path
        response = httpx.post(url, json=request.model_dump(mode="json"), timeout=_REMOTE_TIMEOUT)
        if response.status_code >= 400:
            detail = response.text
            try:
                detail = response.json().get("detail", detail)
            except ValueError:
                pass
            raise TxSentinelError(f"server returned {response.status_code}: {detail}")
        return response.json()
    return handler(request).model_dump(mode="json")


def _pipeline_config(args: argparse.Namespace):
    config = load_config(args.config)
    return apply_overrides(
        config,
        theta=getattr(args, "theta", None),
        top_k=getattr(args, "top_k", None),
        seed=getattr(args, "seed", None),
    )


def cmd_generate(args: argparse.Namespace) -> dict:
    if args.synthetic_config:
        with open(args.synthetic_config, "r", encoding="utf-8") as fh:
            cfg = SyntheticConfig.model_validate(json.load(fh))
    else:
        cfg = SyntheticConfig(
            n_transactions=args.n,
            illicit_fraction=args.illicit_fraction,
            seed=args.seed if args.seed is not None else 0,
        )
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    request = GenerateRequest(config=cfg, out_path=args.out)
    return _dispatch(args, "/v1/generate", request, handlers.handle_generate)


def cmd_train(args: argparse.Namespace) -> dict:
    request = TrainRequest(
        config=_pipeline_config(args),
        data_path=args.data,
        checkpoint_out=args.checkpoint,
    )
    report = _dispatch(args, "/v1/train", request, handlers.handle_train)
    if report["train_metrics"]["f1"] < 0.5:
        print(
            "warning: training barely separated the classes "
            f"(train F1 {report['train_metrics']['f1']:.3f}, final loss "
            f"{report['final_loss']:.3f}); the window may be too sparse -- "
            "try a longer stream, a denser entity pool, more epochs, or a "
            "higher learning rate",
            file=sys.stderr,
        )
    return report


def cmd_index_rules(args: argparse.Namespace) -> dict:
    request = IndexRulesRequest(
        config=_pipeline_config(args),
        corpus_path=args.corpus,
        index_out=args.rules,
    )
    return _dispatch(args, "/v1/index-rules", request, handlers.handle_index_rules)


def cmd_monitor(args: argparse.Namespace) -> dict:
    request = MonitorRequest(
        config=_pipeline_config(args),
        checkpoint=args.checkpoint,
        rules=args.rules,
        stream_path=args.stream,
        alerts_out=args.alerts_out,
        scores_out=args.scores_out,
    )
    return _dispatch(args, "/v1/monitor", request, handlers.handle_monitor)


def cmd_evaluate(args: argparse.Namespace) -> dict:
    request = EvaluateRequest(
        scores_path=args.scores,
        labels_path=args.labels,
        theta=args.theta if args.theta is not None else 0.5,
    )
    return _dispatch(args, "/v1/evaluate", request, handlers.handle_evaluate)


def cmd_gradient_check(args: argparse.Namespace) -> dict:
    request = GradientCheckRequest(
        trials=args.trials,
        seed=args.seed if args.seed is not None else 0,
        step=args.step,
    )
    return _dispatch(args, "/v1/gradient-check", request, handlers.handle_gradient_check)


def cmd_serve(args: argparse.Namespace) -> dict:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return {"status": "stopped"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="txsentinel",
        description="Streaming transaction monitoring with clause-grounded alerts.",
    )
    parser.add_argument("--server", help="base URL of a running txsentinel server")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="pipeline config JSON file")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--theta", type=float, help="override the alert threshold")
        p.add_argument("--top-k", type=int, dest="top_k", help="override retrieval depth")

    p = sub.add_parser("generate", help="emit a seeded synthetic stream")
    p.add_argument("--synthetic-config", help="SyntheticConfig JSON file")
    p.add_argument("--n", type=int, default=5000, help="transaction count")
    p.add_argument("--illicit-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, help="generator seed")
    p.add_argument("--out", help="output JSONL path (omit to print inline)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="chronological split + fit, write checkpoint")
    common(p)
    p.add_argument("--data", required=True, help="transaction JSONL stream")
    p.add_argument("--checkpoint", required=True, help="checkpoint output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("index-rules", help="embed a clause corpus into an index artifact")
    common(p)
    p.add_argument("--corpus", required=True, help="clause corpus JSONL")
    p.add_argument("--rules", required=True, help="index artifact output path")
    p.set_defaults(func=cmd_index_rules)

    p = sub.add_parser("monitor", help="stream a JSONL file through the monitor")
    common(p)
    p.add_argument("--checkpoint", required=True, help="trained checkpoint")
    p.add_argument("--rules", required=True, help="rules index artifact")
    p.add_argument("--stream", required=True, help="transaction JSONL stream")
    p.add_argument("--alerts-out", required=True, dest="alerts_out")
    p.add_argument("--scores-out", dest="scores_out", help="also write per-tx scores")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("evaluate", help="confusion metrics from scores + labels")
    p.add_argument("--scores", required=True, help="scores or alerts JSONL")
    p.add_argument("--labels", required=True, help="labeled transaction JSONL")
    p.add_argument("--theta", type=float, help="decision threshold (default 0.5)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradient-check", help="verify analytic gradients numerically")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--step", type=float, default=1e-5)
    p.set_defaults(func=cmd_gradient_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (TxSentinelError, ValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
