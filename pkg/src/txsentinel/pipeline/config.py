"""Pipeline configuration: one JSON document drives every subcommand."""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, Field, model_validator

from ..embed.base import Embedder
from ..embed.external import load_external_table
from ..embed.hashing import HashingEmbedder
from ..errors import ConfigError
from ..explain.external import ExternalGeneratorConfig
from ..model.network import ModelDims
from ..model.training import TrainConfig


class EmbedderConfig(BaseModel):
    kind: str = "hashing"  # "hashing" | "external-table"
    dimension: int = Field(default=64, gt=0)
    table_path: str | None = None

    @model_validator(mode="after")
    def _check_kind(self) -> "EmbedderConfig":
        if self.kind not in ("hashing", "external-table"):
            raise ValueError(f"unknown embedder kind: {self.kind}")
        if self.kind == "external-table" and not self.table_path:
            raise ValueError("external-table embedder requires table_path")
        return self


class PipelineConfig(BaseModel):
    """Every tunable of the monitoring engine, with desk-scale defaults."""

    alpha: float = Field(default=1e-4, ge=0.0)  # decay rate per second
    # theta 0 (flag everything) and 1 (flag nothing) are allowed as overrides
    theta: float = Field(default=0.5, ge=0.0, le=1.0)  # alert threshold
    top_k: int = Field(default=3, ge=1)
    betweenness_interval: int = Field(default=500, ge=1)
    betweenness_samples: int | None = Field(default=None, ge=1)  # None = exact
    window_horizon: float | None = Field(default=30 * 86400.0, gt=0.0)  # seconds
    flag_percentile: float = Field(default=95.0, gt=0.0, lt=100.0)
    train_ratio: float = Field(default=0.8, gt=0.0, lt=1.0)
    embedder: EmbedderConfig = EmbedderConfig()
    dims: ModelDims = ModelDims()
    train: TrainConfig = TrainConfig()
    external_generator: ExternalGeneratorConfig = ExternalGeneratorConfig()

    @model_validator(mode="after")
    def _check_widths(self) -> "PipelineConfig":
        if self.dims.embed_dim != self.embedder.dimension:
            raise ValueError(
                f"dimension mismatch: model embed_dim {self.dims.embed_dim} "
                f"!= embedder dimension {self.embedder.dimension}"
            )
        return self


def load_config(path: str | Path | None) -> PipelineConfig:
    """Parse the JSON config file; None means all defaults."""
    if path is None:
        return PipelineConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    try:
        return PipelineConfig.model_validate(raw)
    except ValueError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def apply_overrides(
    config: PipelineConfig,
    theta: float | None = None,
    top_k: int | None = None,
    seed: int | None = None,
) -> PipelineConfig:
    """Command-line overrides win over file values."""
    updates: dict = {}
    if theta is not None:
        updates["theta"] = theta
    if top_k is not None:
        updates["top_k"] = top_k
    if seed is not None:
        updates["train"] = config.train.model_copy(update={"seed": seed})
    if not updates:
        return config
    return config.model_copy(update=updates)


def build_embedder(config: PipelineConfig) -> Embedder:
    if config.embedder.kind == "hashing":
        return HashingEmbedder(dimension=config.embedder.dimension)
    return load_external_table(config.embedder.table_path, config.embedder.dimension)
