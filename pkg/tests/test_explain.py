"""Template rendering, grounding guarantees, and the external generator contract."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from txsentinel.errors import NoGroundingError
from txsentinel.explain import (
    AlertContext,
    ExternalGeneratorConfig,
    cited_ids,
    external_generate,
    render_explanation,
)
from txsentinel.graph import NodeFeatures
from txsentinel.ingest import Transaction
from txsentinel.retrieval import RetrievedClause


def make_ctx(n_clauses=3, score=0.9, threshold=0.5, flags=None):
    tx = Transaction("txA", "alice", "bob", 9500.0, 1234, "urgent offshore transfer")
    retrieved = [
        RetrievedClause(
            clause_id=f"AML-{i:03d}",
            source=f"Synthetic AML Rulebook, Article {i}",
            text=f"clause body {i}",
            similarity=0.9 - 0.1 * i,
        )
        for i in range(n_clauses)
    ]
    return AlertContext(
        transaction=tx,
        score=score,
        features=NodeFeatures(3, 1, 0.0, 2.0),
        retrieved=retrieved,
        threshold=threshold,
        flags=list(flags or []),
    )


class TestRenderExplanation:
    def test_single_clause_cited_exactly_once(self):
        ctx = make_ctx(n_clauses=1)
        out = render_explanation(ctx)
        assert out.text.count("AML-000") == 1
        assert out.text.count("Synthetic AML Rulebook, Article 0") == 1
        assert out.generator == "template"

    def test_identical_context_gives_byte_identical_text(self):
        assert render_explanation(make_ctx()).text == render_explanation(make_ctx()).text

    def test_clauses_appear_in_descending_similarity_order(self):
        ctx = make_ctx(n_clauses=3)
        text = render_explanation(ctx).text
        positions = [text.index(f"AML-{i:03d}") for i in range(3)]
        assert positions == sorted(positions)
        sims = [c.similarity for c in ctx.retrieved]
        assert sims == sorted(sims, reverse=True)

    def test_empty_retrieval_rejected(self):
        ctx = make_ctx(n_clauses=1)
        object.__setattr__(ctx, "retrieved", [])
        with pytest.raises(NoGroundingError, match="no grounding clauses"):
            render_explanation(ctx)

    def test_cited_ids_parse_back_from_text(self):
        out = render_explanation(make_ctx(n_clauses=3))
        assert cited_ids(out.text) == ["AML-000", "AML-001", "AML-002"]
        assert set(out.cited_clause_ids) == set(cited_ids(out.text))

    def test_flags_are_rendered(self):
        out = render_explanation(make_ctx(flags=["high fan-in"]))
        assert "high fan-in" in out.text
        none_out = render_explanation(make_ctx())
        assert "none observed" in none_out.text

    def test_transaction_facts_present(self):
        out = render_explanation(make_ctx())
        for token in ("txA", "alice", "bob", "9500.00", "1234"):
            assert token in out.text

    def test_context_requires_score_above_threshold(self):
        with pytest.raises(ValueError, match="score > threshold"):
            make_ctx(score=0.4, threshold=0.5)


class _StubHandler(BaseHTTPRequestHandler):
    response_builder = staticmethod(lambda body: {"text": "stub"})
    seen: list[dict] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).seen.append({"body": body, "auth": self.headers.get("Authorization")})
        payload = type(self).response_builder(body)
        if payload is None:
            self.send_response(500)
            self.end_headers()
            return
        data = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):  # keep test output quiet
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.seen = []
    yield server
    server.shutdown()


def endpoint(server) -> str:
    return f"http://127.0.0.1:{server.server_address[1]}/generate"


class TestExternalGenerate:
    def test_unset_endpoint_falls_back_to_template(self):
        ctx = make_ctx()
        out = external_generate(ExternalGeneratorConfig(), ctx)
        assert out.generator == "template"
        assert out.text == render_explanation(ctx).text

    def test_grounded_response_passes_through(self, stub_server):
        _StubHandler.response_builder = staticmethod(
            lambda body: {"text": f"Flagged per [{body['clauses'][0]['clause_id']}]."}
        )
        ctx = make_ctx()
        out = external_generate(
            ExternalGeneratorConfig(endpoint=endpoint(stub_server)), ctx
        )
        assert out.generator == "external"
        assert "AML-000" in out.text
        assert out.cited_clause_ids == ["AML-000"]

    def test_request_body_matches_wire_contract(self, stub_server):
        _StubHandler.response_builder = staticmethod(lambda body: {"text": "[AML-000]"})
        ctx = make_ctx(flags=["high fan-in"])
        external_generate(ExternalGeneratorConfig(endpoint=endpoint(stub_server)), ctx)
        body = _StubHandler.seen[0]["body"]
        assert set(body) == {"transaction", "score", "flags", "clauses"}
        assert body["transaction"]["tx_id"] == "txA"
        assert body["flags"] == ["high fan-in"]
        assert set(body["clauses"][0]) == {"clause_id", "source", "text", "similarity"}

    def test_ungrounded_response_falls_back(self, stub_server):
        _StubHandler.response_builder = staticmethod(
            lambda body: {"text": "suspicious, trust me"}
        )
        ctx = make_ctx()
        out = external_generate(
            ExternalGeneratorConfig(endpoint=endpoint(stub_server)), ctx
        )
        assert out.generator == "template"

    def test_server_error_falls_back(self, stub_server):
        _StubHandler.response_builder = staticmethod(lambda body: None)  # 500
        out = external_generate(
            ExternalGeneratorConfig(endpoint=endpoint(stub_server)), make_ctx()
        )
        assert out.generator == "template"

    def test_unreachable_endpoint_falls_back(self):
        config = ExternalGeneratorConfig(
            endpoint="http://127.0.0.1:9/never", timeout_seconds=0.2
        )
        assert external_generate(config, make_ctx()).generator == "template"

    def test_malformed_payload_falls_back(self, stub_server):
        _StubHandler.response_builder = staticmethod(lambda body: {"wrong": "shape"})
        out = external_generate(
            ExternalGeneratorConfig(endpoint=endpoint(stub_server)), make_ctx()
        )
        assert out.generator == "template"

    def test_token_env_var_sets_bearer_header(self, stub_server, monkeypatch):
        _StubHandler.response_builder = staticmethod(lambda body: {"text": "[AML-000]"})
        monkeypatch.setenv("EXPLAIN_API_TOKEN", "sekrit")
        external_generate(ExternalGeneratorConfig(endpoint=endpoint(stub_server)), make_ctx())
        assert _StubHandler.seen[-1]["auth"] == "Bearer sekrit"

    def test_empty_retrieval_still_raises(self):
        ctx = make_ctx(n_clauses=1)
        object.__setattr__(ctx, "retrieved", [])
        with pytest.raises(NoGroundingError):
            external_generate(ExternalGeneratorConfig(), ctx)

    def test_grounding_invariant_for_both_paths(self, stub_server):
        _StubHandler.response_builder = staticmethod(
            lambda body: {"text": "见 [AML-001] and [AML-002]"}
        )
        ctx = make_ctx(n_clauses=3)
        for config in (
            ExternalGeneratorConfig(),
            ExternalGeneratorConfig(endpoint=endpoint(stub_server)),
        ):
            out = external_generate(config, ctx)
            retrieved_ids = {c.clause_id for c in ctx.retrieved}
            assert set(out.cited_clause_ids) <= retrieved_ids
            assert set(cited_ids(out.text)) <= retrieved_ids or out.generator == "external"
