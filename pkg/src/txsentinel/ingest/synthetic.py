"""Seeded synthetic transaction streams with planted illicit patterns.

Illicit activity is emitted as structural motifs (fan-in hubs, cycles, rapid
pass-throughs) whose participants are disjoint from the licit account
population, and whose narrative memos are drawn from a phrase pool disjoint
from the licit one. That makes the stream a controlled benchmark: the labels
are recoverable from structure and text by construction.
"""

from __future__ import annotations

import random

from pydantic import BaseModel, Field, field_validator, model_validator

from .transactions import Label, StreamSource, Transaction

DEFAULT_LICIT_PHRASES = (
    "monthly rent payment",
    "grocery purchase",
    "salary deposit",
    "utility bill autopay",
    "coffee subscription",
    "car loan installment",
    "insurance premium",
    "gym membership renewal",
    "bookstore order",
    "dinner with friends",
    "school fees term two",
    "streaming service renewal",
)

DEFAULT_ILLICIT_PHRASES = (
    "urgent offshore transfer",
    "invoice for consulting services rendered",
    "shell company settlement",
    "crypto exchange payout",
    "loan repayment to private party",
    "gift for business associate",
    "equipment purchase no receipt",
    "confidential retainer fee",
    "third party reimbursement",
    "cash handling fee",
    "expedited customs clearance",
    "unverified beneficiary payout",
)

PATTERN_KINDS = ("fan_in", "cycle", "passthrough")


class SyntheticConfig(BaseModel):
    """Configuration for the planted-pattern generator."""

    n_transactions: int = Field(gt=0)
    illicit_fraction: float = Field(gt=0.0, lt=1.0)
    seed: int = 0
    pattern_weights: dict[str, float] = Field(
        default_factory=lambda: {"fan_in": 0.4, "cycle": 0.3, "passthrough": 0.3}
    )
    licit_phrases: tuple[str, ...] = DEFAULT_LICIT_PHRASES
    illicit_phrases: tuple[str, ...] = DEFAULT_ILLICIT_PHRASES
    n_licit_accounts: int | None = Field(default=None, gt=1)
    start_time: int = Field(default=1_600_000_000, ge=0)

    @model_validator(mode="after")
    def _default_account_pool(self) -> "SyntheticConfig":
        # keep the licit graph dense enough to train on: ~4 transactions per
        # account; ultra-sparse windows leave the classifier nothing to learn
        if self.n_licit_accounts is None:
            self.n_licit_accounts = max(50, self.n_transactions // 4)
        return self

    @field_validator("pattern_weights")
    @classmethod
    def _check_weights(cls, weights: dict[str, float]) -> dict[str, float]:
        unknown = set(weights) - set(PATTERN_KINDS)
        if unknown:
            raise ValueError(f"unknown pattern kinds: {sorted(unknown)}")
        if any(w < 0 for w in weights.values()):
            raise ValueError("pattern weights must be non-negative")
        total = sum(weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"pattern weights must sum to 1, got {total}")
        return weights

    @model_validator(mode="after")
    def _check_pools_disjoint(self) -> "SyntheticConfig":
        overlap = set(self.licit_phrases) & set(self.illicit_phrases)
        if overlap:
            raise ValueError(f"narrative phrase pools overlap: {sorted(overlap)}")
        if not self.licit_phrases or not self.illicit_phrases:
            raise ValueError("narrative phrase pools must be non-empty")
        return self


def _new_motif(kind: str, serial: int, rng: random.Random) -> list[tuple[str, str]]:
    """Plan the (sender, receiver) steps of one illicit motif instance."""
    if kind == "fan_in":
        hub = f"hub_{serial:05d}"
        return [(f"mule_{serial:05d}_{j}", hub) for j in range(rng.randint(4, 8))]
    if kind == "cycle":
        size = rng.randint(3, 5)
        ring = [f"ring_{serial:05d}_{j}" for j in range(size)]
        return [(ring[j], ring[(j + 1) % size]) for j in range(size)]
    # passthrough: funds hop through an intermediary within seconds
    src = f"feeder_{serial:05d}"
    mid = f"conduit_{serial:05d}"
    dst = f"sink_{serial:05d}"
    return [(src, mid), (mid, dst)]


def generate_synthetic(cfg: SyntheticConfig) -> StreamSource:
    """Generate a deterministic, time-ordered stream of labeled transactions.

    Labels are drawn per transaction (Bernoulli on ``illicit_fraction``);
    illicit transactions advance the currently active motif, starting a new
    one (kind chosen by ``pattern_weights``) whenever none is in flight.
    """
    rng = random.Random(cfg.seed)
    kinds = [k for k in PATTERN_KINDS if cfg.pattern_weights.get(k, 0.0) > 0]
    weights = [cfg.pattern_weights[k] for k in kinds]

    accounts = [f"acct_{i:05d}" for i in range(cfg.n_licit_accounts)]
    transactions: list[Transaction] = []
    now = cfg.start_time
    motif_steps: list[tuple[str, str]] = []
    motif_serial = 0

    for i in range(cfg.n_transactions):
        illicit = rng.random() < cfg.illicit_fraction
        if illicit:
            if not motif_steps:
                kind = rng.choices(kinds, weights=weights, k=1)[0]
                motif_steps = _new_motif(kind, motif_serial, rng)
                motif_serial += 1
                now += rng.randint(3, 20)
            else:
                # continuation steps land close together: the motifs are rapid
                now += rng.randint(0, 2)
            sender, receiver = motif_steps.pop(0)
            amount = round(rng.uniform(8500.0, 9900.0), 2)
            narrative = rng.choice(cfg.illicit_phrases)
            label = Label.ILLICIT
        else:
            now += rng.randint(3, 20)
            sender = rng.choice(accounts)
            receiver = rng.choice(accounts)
            while receiver == sender:
                receiver = rng.choice(accounts)
            amount = round(rng.uniform(10.0, 2000.0), 2)
            narrative = rng.choice(cfg.licit_phrases)
            label = Label.LICIT

        transactions.append(
            Transaction(
                tx_id=f"tx{i:07d}",
                sender=sender,
                receiver=receiver,
                amount=amount,
                timestamp=now,
                narrative=narrative,
                label=label,
            )
        )

    return StreamSource(kind="synthetic", transactions=tuple(transactions))
