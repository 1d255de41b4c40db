"""Pipeline configuration: one JSON schema shared by the config file and
the command-line flags (flag names equal config keys)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .cluster import DEFAULT_MAX_BLOCKS, DEFAULT_MAX_DIFF_WEI
from .errors import ValidationError
from .fpfilter import FilterThresholds

ENV_CONFIG = "NFTSQUAT_CONFIG"

# config keys that name input files or directories
PATH_KEYS = (
    "seeds",
    "candidates",
    "logs",
    "transactions",
    "metadata",
    "market_map",
    "english_words",
    "crypto_words",
    "homoglyphs",
    "homophones",
    "combination_words",
    "exchanges",
    "whitelist",
    "labels",
    "social",
    "hash_cache",
    "images_dir",
    "usd_table",
)

THRESHOLD_KEYS = tuple(f.name for f in fields(FilterThresholds))


@dataclass
class PipelineConfig:
    seeds: str | None = None
    candidates: str | None = None
    logs: str | None = None
    transactions: str | None = None
    metadata: str | None = None
    market_map: str | None = None
    english_words: str | None = None
    crypto_words: str | None = None
    homoglyphs: str | None = None
    homophones: str | None = None
    combination_words: str | None = None
    exchanges: str | None = None
    whitelist: str | None = None
    labels: str | None = None
    social: str | None = None
    hash_cache: str | None = None
    images_dir: str | None = None
    usd_table: str | None = None
    output_dir: str = "out"
    thresholds: FilterThresholds = FilterThresholds()
    max_diff_wei: int = DEFAULT_MAX_DIFF_WEI
    max_blocks: int = DEFAULT_MAX_BLOCKS
    adjacent_key: bool = False
    dhash_inclusive: bool = False
    threads: int = 1

    def require(self, key: str) -> str:
        value = getattr(self, key)
        if value is None:
            raise ValidationError(f"config is missing required path {key!r}")
        return value

    def out_path(self, name: str) -> Path:
        return Path(self.output_dir) / name


def _load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return doc


def load_config(config_path: str | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Assemble the config: defaults, then the file, then flag overrides.

    Relative paths in the config file resolve against the file's directory.
    Every referenced input path must exist.
    """
    if config_path is None:
        config_path = os.environ.get(ENV_CONFIG)
    doc: dict = {}
    base = Path(".")
    if config_path:
        doc = _load_config_file(config_path)
        base = Path(config_path).parent

    merged: dict = {}
    threshold_values: dict = {}
    known = {f.name for f in fields(PipelineConfig)}
    for key, value in doc.items():
        if key in THRESHOLD_KEYS:
            threshold_values[key] = value
        elif key in known:
            if key in PATH_KEYS or key == "output_dir":
                value = str(Path(base, value)) if value is not None else None
            merged[key] = value
        else:
            raise ValidationError(f"unknown config key {key!r}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in THRESHOLD_KEYS:
            threshold_values[key] = value
        elif key in known:
            merged[key] = value
        else:
            raise ValidationError(f"unknown config override {key!r}")

    merged["thresholds"] = FilterThresholds(**threshold_values)
    config = PipelineConfig(**merged)

    if config.max_diff_wei < 1 or config.max_blocks < 0:
        raise ValidationError("cluster bounds must be positive")
    if config.threads < 1:
        raise ValidationError("threads must be >= 1")
    for key in PATH_KEYS:
        value = getattr(config, key)
        if value is not None and not Path(value).exists():
            raise ValidationError(f"configured path {key} does not exist: {value}")
    return config
