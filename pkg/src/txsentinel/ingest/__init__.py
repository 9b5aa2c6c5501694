"""Transaction stream sources: JSONL files, Elliptic exports, synthetic generator."""

from .elliptic import EllipticData, load_elliptic
from .synthetic import (
    DEFAULT_ILLICIT_PHRASES,
    DEFAULT_LICIT_PHRASES,
    SyntheticConfig,
    generate_synthetic,
)
from .transactions import (
    Label,
    StreamSource,
    Transaction,
    jsonl_source,
    parse_transaction,
    read_jsonl,
    write_jsonl,
)

__all__ = [
    "DEFAULT_ILLICIT_PHRASES",
    "DEFAULT_LICIT_PHRASES",
    "EllipticData",
    "Label",
    "StreamSource",
    "SyntheticConfig",
    "Transaction",
    "generate_synthetic",
    "jsonl_source",
    "load_elliptic",
    "parse_transaction",
    "read_jsonl",
    "write_jsonl",
]
