"""Transaction records, JSONL parsing, and ordered stream helpers.

Wire format: one JSON object per line, UTF-8, with fields ``tx_id``,
``sender``, ``receiver``, ``amount``, ``timestamp``, ``narrative`` and an
optional ``label`` of ``"licit" | "illicit" | "unknown"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import ParseError, StreamOrderError


class Label(str, Enum):
    LICIT = "licit"
    ILLICIT = "illicit"
    UNKNOWN = "unknown"


_REQUIRED_FIELDS = ("tx_id", "sender", "receiver", "amount", "timestamp", "narrative")


@dataclass(frozen=True, slots=True)
class Transaction:
    """One streamed financial event."""

    tx_id: str
    sender: str
    receiver: str
    amount: float
    timestamp: int
    narrative: str = ""
    label: Label = Label.UNKNOWN

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "sender": self.sender,
            "receiver": self.receiver,
            "amount": self.amount,
            "timestamp": self.timestamp,
            "narrative": self.narrative,
            "label": self.label.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def parse_transaction(line: str) -> Transaction:
    """Parse one JSONL line into a Transaction.

    Every malformed input raises :class:`ParseError` naming the offending
    field; nothing is silently dropped or coerced.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("transaction line must be a JSON object")

    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise ParseError(f"missing required field: {name}", field=name)

    tx_id = obj["tx_id"]
    if not isinstance(tx_id, str) or not tx_id:
        raise ParseError("tx_id must be a non-empty string", field="tx_id")

    sender = obj["sender"]
    if not isinstance(sender, str) or not sender:
        raise ParseError("sender must be a non-empty string", field="sender")

    receiver = obj["receiver"]
    if not isinstance(receiver, str) or not receiver:
        raise ParseError("receiver must be a non-empty string", field="receiver")

    amount = obj["amount"]
    if isinstance(amount, bool) or not isinstance(amount, (int, float)):
        raise ParseError("non-numeric amount", field="amount")
    amount = float(amount)
    if amount < 0:
        raise ParseError("negative amount", field="amount")

    timestamp = obj["timestamp"]
    if isinstance(timestamp, bool) or not isinstance(timestamp, (int, float)):
        raise ParseError("non-numeric timestamp", field="timestamp")
    if isinstance(timestamp, float) and not timestamp.is_integer():
        raise ParseError("timestamp must be integral seconds", field="timestamp")
    timestamp = int(timestamp)
    if timestamp < 0:
        raise ParseError("negative timestamp", field="timestamp")

    narrative = obj["narrative"]
    if not isinstance(narrative, str):
        raise ParseError("narrative must be a string", field="narrative")

    raw_label = obj.get("label", Label.UNKNOWN.value)
    try:
        label = Label(raw_label)
    except ValueError:
        raise ParseError(f"unknown label value: {raw_label!r}", field="label") from None

    return Transaction(tx_id, sender, receiver, amount, timestamp, narrative, label)


def read_jsonl(path: str | Path) -> Iterator[Transaction]:
    """Stream transactions from a JSONL file.

    Enforces the source guarantees: non-decreasing timestamps and unique
    tx_ids within the stream.
    """
    seen: set[str] = set()
    last_ts = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                tx = parse_transaction(line)
            except ParseError as exc:
                raise ParseError(f"line {lineno}: {exc}", field=exc.field) from exc
            if tx.tx_id in seen:
                raise ParseError(f"line {lineno}: duplicate tx_id {tx.tx_id}", field="tx_id")
            seen.add(tx.tx_id)
            if tx.timestamp < last_ts:
                raise StreamOrderError(
                    f"line {lineno}: timestamp {tx.timestamp} decreases below {last_ts}"
                )
            last_ts = tx.timestamp
            yield tx


def write_jsonl(transactions: Iterable[Transaction], path: str | Path) -> int:
    """Write transactions as JSONL; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for tx in transactions:
            fh.write(tx.to_json())
            fh.write("\n")
            count += 1
    return count


@dataclass(frozen=True)
class StreamSource:
    """A replayable, time-ordered transaction source."""

    kind: str  # "jsonl" | "elliptic" | "synthetic"
    transactions: tuple[Transaction, ...] = field(repr=False)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.transactions)

    def __len__(self) -> int:
        return len(self.transactions)

    def __getitem__(self, item: int) -> Transaction:
        return self.transactions[item]


def jsonl_source(path: str | Path) -> StreamSource:
    """Materialize a JSONL file as a replayable source (guarantees enforced)."""
    return StreamSource(kind="jsonl", transactions=tuple(read_jsonl(path)))
