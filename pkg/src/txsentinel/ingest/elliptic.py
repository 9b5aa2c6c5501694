"""Loader for the public Elliptic Bitcoin AML dataset export.

Expected directory layout (the Kaggle distribution):

* ``elliptic_txs_features.csv`` — no header; node id followed by 166 feature
  columns, the first of which is the time step (1..49).
* ``elliptic_txs_classes.csv``  — header row; columns ``txId,class`` with
  class codes ``1`` (illicit), ``2`` (licit) or ``unknown``.
* ``elliptic_txs_edgelist.csv`` — header row; columns ``txId1,txId2``.

Each edgelist row becomes one Transaction with amount 1.0, timestamp equal to
the source node's time step, and an empty narrative; the dataset carries no
per-edge amounts or memo text. Ties are ordered by tx_id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import DatasetError
from .transactions import Label, StreamSource, Transaction

FEATURE_DIM = 166

FEATURES_FILE = "elliptic_txs_features.csv"
CLASSES_FILE = "elliptic_txs_classes.csv"
EDGELIST_FILE = "elliptic_txs_edgelist.csv"

_CLASS_CODES = {"1": Label.ILLICIT, "2": Label.LICIT, "unknown": Label.UNKNOWN}


@dataclass
class EllipticData:
    """Materialized dataset: ordered transactions plus per-node metadata."""

    transactions: StreamSource
    node_features: dict[str, np.ndarray] = field(repr=False)
    labels: dict[str, Label] = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_features)

    @property
    def n_edges(self) -> int:
        return len(self.transactions)

    @property
    def feature_dim(self) -> int:
        return FEATURE_DIM

    @property
    def n_time_steps(self) -> int:
        steps = {int(v[0]) for v in self.node_features.values()}
        return len(steps)

    @property
    def n_labeled(self) -> int:
        return sum(1 for lab in self.labels.values() if lab is not Label.UNKNOWN)

    @property
    def illicit_fraction_of_labeled(self) -> float:
        labeled = self.n_labeled
        if labeled == 0:
            return 0.0
        illicit = sum(1 for lab in self.labels.values() if lab is Label.ILLICIT)
        return illicit / labeled


def _require(directory: Path, name: str) -> Path:
    path = directory / name
    if not path.is_file():
        raise DatasetError(f"missing dataset file: {path}")
    return path


def load_elliptic(directory: str | Path) -> EllipticData:
    """Load the three Elliptic CSVs into an ordered transaction stream."""
    directory = Path(directory)
    features_path = _require(directory, FEATURES_FILE)
    classes_path = _require(directory, CLASSES_FILE)
    edgelist_path = _require(directory, EDGELIST_FILE)

    feats = pd.read_csv(features_path, header=None)
    if feats.shape[1] != FEATURE_DIM + 1:
        raise DatasetError(
            f"feature-width mismatch: expected {FEATURE_DIM} feature columns, "
            f"got {feats.shape[1] - 1}"
        )
    node_ids = feats.iloc[:, 0].astype(str).to_numpy()
    matrix = feats.iloc[:, 1:].to_numpy(dtype=np.float64)
    node_features = {nid: matrix[i] for i, nid in enumerate(node_ids)}
    time_steps = {nid: int(matrix[i, 0]) for i, nid in enumerate(node_ids)}

    classes = pd.read_csv(classes_path, dtype=str)
    if classes.shape[1] != 2:
        raise DatasetError("classes file must have exactly two columns")
    labels: dict[str, Label] = {}
    for nid, code in zip(classes.iloc[:, 0], classes.iloc[:, 1]):
        label = _CLASS_CODES.get(str(code))
        if label is None:
            raise DatasetError(f"unknown class code {code!r} for node {nid}")
        labels[str(nid)] = label
    # nodes present in features but absent from the classes file are unknown
    for nid in node_features:
        labels.setdefault(nid, Label.UNKNOWN)

    edges = pd.read_csv(edgelist_path, dtype=str)
    if edges.shape[1] != 2:
        raise DatasetError("edgelist file must have exactly two columns")

    transactions = []
    for ordinal, (src, dst) in enumerate(zip(edges.iloc[:, 0], edges.iloc[:, 1])):
        src, dst = str(src), str(dst)
        step = time_steps.get(src)
        if step is None:
            raise DatasetError(f"edgelist references unknown node {src}")
        if dst not in node_features:
            raise DatasetError(f"edgelist references unknown node {dst}")
        transactions.append(
            Transaction(
                tx_id=f"{src}-{dst}#{ordinal}",
                sender=src,
                receiver=dst,
                amount=1.0,
                timestamp=step,
                narrative="",
                label=labels.get(src, Label.UNKNOWN),
            )
        )
    transactions.sort(key=lambda tx: (tx.timestamp, tx.tx_id))

    return EllipticData(
        transactions=StreamSource(kind="elliptic", transactions=tuple(transactions)),
        node_features=node_features,
        labels=labels,
    )
