"""Configuration management for the benchmark harness."""

import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field

TRUTHY = frozenset({"1", "true", "yes", "on"})


def _default_workers() -> int:
    return max(1, os.cpu_count() or 1)


class RuntimeConfig(BaseModel):
    """Process-level settings."""

    workers: int = Field(
        default_factory=_default_workers, ge=1, description="Worker threads for parallel stages"
    )
    log_level: str = Field(default="INFO", description="Root logging level")


class BenchSettings(BaseModel):
    """Defaults for the evaluation protocol."""

    n_repeats: int = Field(default=10, ge=1, description="Random splits per run")
    master_seed: int = Field(default=0, ge=0, lt=2**64, description="Seed every repeat and trial derives from")
    record_resources: bool = Field(
        default=False,
        description="Record wall-clock and peak memory in reports (makes reports non-reproducible)",
    )


class OutputConfig(BaseModel):
    """Report rendering settings."""

    csv_significant_digits: int = Field(default=6, ge=1, le=17, description="Digits in CSV cells")
    json_indent: int = Field(default=2, ge=0, description="Indentation of JSON reports")


class Config(BaseModel):
    """Main application configuration."""

    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    bench: BenchSettings = Field(default_factory=BenchSettings)
    output: OutputConfig = Field(default_factory=OutputConfig)


def load_config(config_path: str | Path = "gad.yaml") -> Config:
    """Load configuration from a YAML file, with environment variable overrides.

    Environment variables take precedence over config file values. The YAML
    file is optional; when absent, configuration comes from the environment
    and the model defaults.

    Args:
        config_path: Path to the YAML configuration file

    Returns:
        Loaded configuration object

    Raises:
        pydantic.ValidationError: If any supplied setting fails validation
    """
    config_path = Path(config_path)
    config_data: dict[str, Any] = {}

    if config_path.exists():
        with open(config_path, encoding="utf-8") as file:
            # An empty file parses to None.
            config_data = yaml.safe_load(file) or {}

    if workers := os.getenv("GAD_WORKERS"):
        config_data.setdefault("runtime", {})["workers"] = int(workers)

    if log_level := os.getenv("GAD_LOG_LEVEL"):
        config_data.setdefault("runtime", {})["log_level"] = log_level.strip().upper()

    if repeats := os.getenv("GAD_REPEATS"):
        config_data.setdefault("bench", {})["n_repeats"] = int(repeats)

    if master_seed := os.getenv("GAD_MASTER_SEED"):
        config_data.setdefault("bench", {})["master_seed"] = int(master_seed)

    if record_resources := os.getenv("GAD_RECORD_RESOURCES"):
        config_data.setdefault("bench", {})["record_resources"] = (
            record_resources.strip().lower() in TRUTHY
        )

    return Config(**config_data)
