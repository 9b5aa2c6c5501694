"""Elliptic CSV loader against a miniature dataset written on the fly."""

from __future__ import annotations

import pytest

from txsentinel.errors import DatasetError
from txsentinel.ingest import Label, load_elliptic

FEATURES = "elliptic_txs_features.csv"
CLASSES = "elliptic_txs_classes.csv"
EDGELIST = "elliptic_txs_edgelist.csv"


def write_mini_dataset(directory, n_features=166):
    # six nodes over three time steps; 5 edges
    nodes = {
        "n1": (1, "2"),
        "n2": (1, "1"),
        "n3": (2, "unknown"),
        "n4": (2, "2"),
        "n5": (3, "1"),
        "n6": (3, "unknown"),
    }
    with open(directory / FEATURES, "w") as fh:
        for i, (node, (step, _)) in enumerate(nodes.items()):
            rest = ",".join(str(0.25 * (i + j)) for j in range(n_features - 1))
            fh.write(f"{node},{step},{rest}\n")
    with open(directory / CLASSES, "w") as fh:
        fh.write("txId,class\n")
        for node, (_, cls) in nodes.items():
            fh.write(f"{node},{cls}\n")
    with open(directory / EDGELIST, "w") as fh:
        fh.write("txId1,txId2\n")
        for src, dst in [("n1", "n3"), ("n2", "n3"), ("n3", "n5"), ("n4", "n5"), ("n5", "n6")]:
            fh.write(f"{src},{dst}\n")


def test_loads_counts_and_widths(tmp_path):
    write_mini_dataset(tmp_path)
    data = load_elliptic(tmp_path)
    assert data.n_nodes == 6
    assert data.n_edges == 5
    assert data.feature_dim == 166
    assert data.n_time_steps == 3
    assert data.n_labeled == 4
    assert data.labels["n1"] is Label.LICIT
    assert data.labels["n2"] is Label.ILLICIT
    assert data.labels["n3"] is Label.UNKNOWN
    assert all(v.shape == (166,) for v in data.node_features.values())


def test_transactions_ordered_and_shaped(tmp_path):
    write_mini_dataset(tmp_path)
    data = load_elliptic(tmp_path)
    txs = list(data.transactions)
    assert all(a.timestamp <= b.timestamp for a, b in zip(txs, txs[1:]))
    # ties broken by tx_id
    same_ts = [t.tx_id for t in txs if t.timestamp == 1]
    assert same_ts == sorted(same_ts)
    assert all(t.amount == 1.0 and t.narrative == "" for t in txs)
    # timestamp equals the source node's time step
    by_id = {t.tx_id: t for t in txs}
    assert by_id["n3-n5#2"].timestamp == 2
    # transaction label comes from the source node
    assert by_id["n2-n3#1"].label is Label.ILLICIT


def test_truncated_features_file_rejected(tmp_path):
    write_mini_dataset(tmp_path, n_features=165)
    with pytest.raises(DatasetError, match="feature-width mismatch"):
        load_elliptic(tmp_path)


def test_missing_file_rejected(tmp_path):
    write_mini_dataset(tmp_path)
    (tmp_path / EDGELIST).unlink()
    with pytest.raises(DatasetError, match="missing dataset file"):
        load_elliptic(tmp_path)


def test_unknown_class_code_rejected(tmp_path):
    write_mini_dataset(tmp_path)
    with open(tmp_path / CLASSES, "a") as fh:
        fh.write("n6,7\n")
    with pytest.raises(DatasetError, match="unknown class code"):
        load_elliptic(tmp_path)


def test_edge_to_unknown_node_rejected(tmp_path):
    write_mini_dataset(tmp_path)
    with open(tmp_path / EDGELIST, "a") as fh:
        fh.write("n1,ghost\n")
    with pytest.raises(DatasetError, match="unknown node"):
        load_elliptic(tmp_path)
