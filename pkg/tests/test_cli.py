"""CLI thin client: full lifecycle, overrides, exit codes, remote mode."""

from __future__ import annotations

import json
import socket
import threading
import time

import pytest

from txsentinel.cli import main


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def lifecycle(tmp_path_factory):
    """generate -> train -> index-rules once; individual tests reuse the artifacts."""
    import io
    from contextlib import redirect_stdout

    from txsentinel.retrieval import default_corpus_path

    root = tmp_path_factory.mktemp("cli")
    stream = root / "stream.jsonl"
    checkpoint = root / "model.ckpt"
    rules = root / "rules.index.json"

    def run(*args):
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = main(list(args))
        assert code == 0, buf.getvalue()
        return json.loads(buf.getvalue())

    gen = run(
        "generate", "--n", "400", "--illicit-fraction", "0.25", "--seed", "6", "--out", str(stream)
    )
    config = root / "config.json"
    config.write_text(json.dumps({"train": {"epochs": 60}}))
    train = run("train", "--config", str(config), "--data", str(stream), "--checkpoint", str(checkpoint))
    rules_report = run(
        "index-rules", "--corpus", str(default_corpus_path()), "--rules", str(rules)
    )
    return {
        "root": root,
        "stream": stream,
        "checkpoint": checkpoint,
        "rules": rules,
        "config": config,
        "gen": gen,
        "train": train,
        "rules_report": rules_report,
    }


class TestGenerate:
    def test_writes_stream_and_reports_count(self, lifecycle):
        assert lifecycle["gen"]["count"] == 400
        assert len(lifecycle["stream"].read_text().splitlines()) == 400

    def test_effective_generator_config_echoed(self, lifecycle):
        cfg = lifecycle["gen"]["config"]
        assert cfg["n_transactions"] == 400
        assert cfg["seed"] == 6
        assert cfg["n_licit_accounts"] == 100  # derived from stream length

    def test_same_seed_is_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run_cli(capsys, "generate", "--n", "100", "--seed", "9", "--out", str(a))
        run_cli(capsys, "generate", "--n", "100", "--seed", "9", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_synthetic_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps({"n_transactions": 12, "illicit_fraction": 0.4, "seed": 2}))
        code, out, _ = run_cli(capsys, "generate", "--synthetic-config", str(cfg))
        assert code == 0
        assert json.loads(out)["count"] == 12

    def test_invalid_fraction_exits_nonzero(self, capsys, tmp_path):
        code, out, err = run_cli(
            capsys, "generate", "--n", "10", "--illicit-fraction", "0", "--out", str(tmp_path / "x")
        )
        assert code == 1
        assert "error" in err
        assert out == ""


class TestTrain:
    def test_report_and_checkpoint(self, lifecycle):
        assert lifecycle["checkpoint"].exists()
        report = lifecycle["train"]
        assert report["epochs"] == 60
        assert report["split"] == {
            "train_count": 320,
            "test_count": 80,
            "boundary_timestamp": report["split"]["boundary_timestamp"],
        }
        assert report["config"]["theta"] == 0.5  # effective config echoed

    def test_same_seed_identical_checkpoints(self, capsys, lifecycle, tmp_path):
        c1, c2 = tmp_path / "c1.ckpt", tmp_path / "c2.ckpt"
        for target in (c1, c2):
            code, _, err = run_cli(
                capsys,
                "train",
                "--config",
                str(lifecycle["config"]),
                "--data",
                str(lifecycle["stream"]),
                "--checkpoint",
                str(target),
                "--seed",
                "77",
            )
            assert code == 0, err
        assert c1.read_bytes() == c2.read_bytes()

    def test_all_licit_data_degenerate_labels(self, capsys, tmp_path):
        from txsentinel.ingest import Transaction, write_jsonl
        from txsentinel.ingest.transactions import Label

        stream = tmp_path / "licit.jsonl"
        write_jsonl(
            [
                Transaction(f"t{i}", f"a{i%5}", f"b{i%7}", 1.0, i, "rent", Label.LICIT)
                for i in range(50)
            ],
            stream,
        )
        code, _, err = run_cli(
            capsys, "train", "--data", str(stream), "--checkpoint", str(tmp_path / "c.ckpt")
        )
        assert code == 1
        assert "degenerate labels" in err


class TestMonitorAndEvaluate:
    def monitor(self, capsys, lifecycle, tmp_path, *extra):
        alerts = tmp_path / "alerts.jsonl"
        scores = tmp_path / "scores.jsonl"
        code, out, err = run_cli(
            capsys,
            "monitor",
            "--checkpoint",
            str(lifecycle["checkpoint"]),
            "--rules",
            str(lifecycle["rules"]),
            "--stream",
            str(lifecycle["stream"]),
            "--alerts-out",
            str(alerts),
            "--scores-out",
            str(scores),
            *extra,
        )
        assert code == 0, err
        return json.loads(out), alerts, scores

    def test_summary_matches_emitted_files(self, capsys, lifecycle, tmp_path):
        summary, alerts, scores = self.monitor(capsys, lifecycle, tmp_path)
        assert summary["transactions"] == 400
        assert summary["alert_count"] == len(alerts.read_text().splitlines())
        assert len(scores.read_text().splitlines()) == 400
        assert summary["config"]["theta"] == 0.5

    def test_theta_floor_alerts_every_transaction(self, capsys, lifecycle, tmp_path):
        summary, alerts, _ = self.monitor(capsys, lifecycle, tmp_path, "--theta", "0")
        assert summary["alert_count"] == 400

    def test_top_k_override_changes_clause_count(self, capsys, lifecycle, tmp_path):
        summary, alerts, _ = self.monitor(
            capsys, lifecycle, tmp_path, "--theta", "0", "--top-k", "5"
        )
        from txsentinel.pipeline import parse_alert

        first = parse_alert(alerts.read_text().splitlines()[0])
        assert len(first.clauses) == 5
        assert summary["config"]["top_k"] == 5

    def test_theta_ceiling_alerts_nothing(self, capsys, lifecycle, tmp_path):
        summary, alerts, _ = self.monitor(capsys, lifecycle, tmp_path, "--theta", "0.99999999")
        assert summary["alert_count"] == 0
        assert alerts.read_text() == ""

    def test_empty_stream_ok(self, capsys, lifecycle, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        alerts = tmp_path / "alerts.jsonl"
        code, out, _ = run_cli(
            capsys,
            "monitor",
            "--checkpoint",
            str(lifecycle["checkpoint"]),
            "--rules",
            str(lifecycle["rules"]),
            "--stream",
            str(empty),
            "--alerts-out",
            str(alerts),
        )
        assert code == 0
        assert json.loads(out)["transactions"] == 0

    def test_evaluate_from_scores(self, capsys, lifecycle, tmp_path):
        _, _, scores = self.monitor(capsys, lifecycle, tmp_path)
        code, out, _ = run_cli(
            capsys,
            "evaluate",
            "--scores",
            str(scores),
            "--labels",
            str(lifecycle["stream"]),
        )
        assert code == 0
        body = json.loads(out)
        assert body["evaluated"] == 400
        assert body["theta"] == 0.5

    def test_perfect_fixture_f1_one(self, capsys, tmp_path):
        scores = tmp_path / "scores.jsonl"
        labels = tmp_path / "labels.jsonl"
        scores.write_text(
            "\n".join(
                json.dumps({"tx_id": t, "score": s})
                for t, s in [("a", 0.9), ("b", 0.9), ("c", 0.1)]
            )
        )
        labels.write_text(
            "\n".join(
                json.dumps({"tx_id": t, "label": l})
                for t, l in [("a", "illicit"), ("b", "illicit"), ("c", "licit")]
            )
        )
        code, out, _ = run_cli(capsys, "evaluate", "--scores", str(scores), "--labels", str(labels))
        assert json.loads(out)["metrics"]["f1"] == 1.0

    def test_hand_computed_half_f1(self, capsys, tmp_path):
        scores = tmp_path / "scores.jsonl"
        labels = tmp_path / "labels.jsonl"
        scores.write_text(
            "\n".join(
                json.dumps({"tx_id": t, "score": s})
                for t, s in [("tp", 0.9), ("fp", 0.9), ("fn", 0.1)]
            )
        )
        labels.write_text(
            "\n".join(
                json.dumps({"tx_id": t, "label": l})
                for t, l in [("tp", "illicit"), ("fp", "licit"), ("fn", "illicit")]
            )
        )
        code, out, _ = run_cli(capsys, "evaluate", "--scores", str(scores), "--labels", str(labels))
        assert json.loads(out)["metrics"]["f1"] == 0.5

    def test_recall_non_increasing_as_theta_grows(self, capsys, lifecycle, tmp_path):
        _, _, scores = self.monitor(capsys, lifecycle, tmp_path)
        recalls = []
        for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
            code, out, _ = run_cli(
                capsys,
                "evaluate",
                "--scores",
                str(scores),
                "--labels",
                str(lifecycle["stream"]),
                "--theta",
                str(theta),
            )
            recalls.append(json.loads(out)["metrics"]["recall"])
        assert all(a >= b for a, b in zip(recalls, recalls[1:]))

    def test_evaluate_from_alerts_file_treats_missing_as_negative(
        self, capsys, lifecycle, tmp_path
    ):
        summary, alerts, _ = self.monitor(capsys, lifecycle, tmp_path)
        code, out, _ = run_cli(
            capsys, "evaluate", "--scores", str(alerts), "--labels", str(lifecycle["stream"])
        )
        assert code == 0
        assert json.loads(out)["evaluated"] == 400


def test_gradient_check_command(capsys):
    code, out, _ = run_cli(capsys, "gradient-check", "--trials", "2")
    assert code == 0
    body = json.loads(out)
    assert body["passed"] is True


def test_missing_subcommand_arguments_exit_nonzero(capsys):
    with pytest.raises(SystemExit):
        main(["train"])  # argparse exits on missing required args


@pytest.fixture(scope="module")
def server_url():
    import uvicorn

    from txsentinel.service import create_app

    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("uvicorn did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestRemoteMode:
    def test_generate_via_server(self, capsys, server_url, tmp_path):
        out_path = tmp_path / "remote.jsonl"
        code, out, err = run_cli(
            capsys,
            "--server",
            server_url,
            "generate",
            "--n",
            "20",
            "--seed",
            "3",
            "--out",
            str(out_path),
        )
        assert code == 0, err
        assert json.loads(out)["count"] == 20
        assert len(out_path.read_text().splitlines()) == 20

    def test_server_error_propagates_as_nonzero_exit(self, capsys, server_url, tmp_path):
        code, _, err = run_cli(
            capsys,
            "--server",
            server_url,
            "evaluate",
            "--scores",
            str(tmp_path / "missing.jsonl"),
            "--labels",
            str(tmp_path / "missing2.jsonl"),
        )
        assert code == 1
        assert "server returned" in err
