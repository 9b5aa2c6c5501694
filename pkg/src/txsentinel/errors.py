"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TxSentinelError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TxSentinelError):
    """A transaction line failed to parse; ``field`` names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class StreamOrderError(TxSentinelError):
    """A stream violated the non-decreasing timestamp guarantee."""


class DatasetError(TxSentinelError):
    """A dataset directory or file is missing or malformed."""


class ConfigError(TxSentinelError):
    """Invalid configuration value."""


class StaleTransactionError(TxSentinelError):
    """Transaction is older than the graph's window horizon."""


class FutureTransactionError(TxSentinelError):
    """Decay weight requested for a transaction newer than the reference time."""


class UnknownNodeError(TxSentinelError):
    """Feature lookup on a node that is not in the graph."""


class ZeroVectorError(TxSentinelError):
    """Cannot normalize a zero vector."""


class EmbeddingNotFoundError(TxSentinelError):
    """External embedding table has no entry for the requested text."""


class DimensionMismatchError(TxSentinelError):
    """Vector or weight dimensions are inconsistent."""


class CheckpointError(TxSentinelError):
    """Checkpoint file is corrupt, truncated, or of the wrong version."""


class DegenerateLabelsError(TxSentinelError):
    """Training set contains only one class."""


class CorpusError(TxSentinelError):
    """Regulatory corpus is empty, has duplicate ids, or a zero embedding."""


class EmptyQueryError(TxSentinelError):
    """Retrieval query has no narrative text and no structural flags."""


class NoGroundingError(TxSentinelError):
    """An explanation was requested with an empty retrieval result."""
