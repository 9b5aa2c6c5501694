"""Optional HTTP-backed explanation generator with a grounding guard.

Wire contract: POST JSON ``{"transaction": {...}, "score": number, "flags":
[...], "clauses": [{"clause_id", "source", "text", "similarity"}]}``; the
service answers ``{"text": string}``. Any transport or contract failure, and
any response that cites none of the retrieved clause ids, falls back to the
deterministic template; explanations are never lost to the generator.
"""

from __future__ import annotations

import os

import httpx
from pydantic import BaseModel

from .template import AlertContext, Explanation, render_explanation

TOKEN_ENV_VAR = "EXPLAIN_API_TOKEN"


class ExternalGeneratorConfig(BaseModel):
    endpoint: str | None = None
    timeout_seconds: float = 10.0


def request_body(ctx: AlertContext) -> dict:
    return {
        "transaction": ctx.transaction.to_dict(),
        "score": ctx.score,
        "flags": list(ctx.flags),
        "clauses": [
            {
                "clause_id": c.clause_id,
                "source": c.source,
                "text": c.text,
                "similarity": c.similarity,
            }
            for c in ctx.retrieved
        ],
    }


def external_generate(
    config: ExternalGeneratorConfig,
    ctx: AlertContext,
    timeout: float | None = None,
) -> Explanation:
    """Generate via the configured endpoint, falling back to the template."""
    fallback = render_explanation(ctx)  # raises on empty retrieval, as required
    if not config.endpoint:
        return fallback

    headers = {}
    token = os.environ.get(TOKEN_ENV_VAR)
    if token:
        headers["Authorization"] = f"Bearer {token}"
    try:
        response = httpx.post(
            config.endpoint,
            json=request_body(ctx),
            timeout=timeout if timeout is not None else config.timeout_seconds,
            headers=headers,
        )
        response.raise_for_status()
        payload = response.json()
    except (httpx.HTTPError, ValueError):
        return fallback

    text = payload.get("text") if isinstance(payload, dict) else None
    if not isinstance(text, str) or not text:
        return fallback
    cited = [c.clause_id for c in ctx.retrieved if c.clause_id in text]
    if not cited:
        # grounding guard: output must be traceable to retrieved clauses
        return fallback
    return Explanation(text=text, cited_clause_ids=cited, generator="external")
