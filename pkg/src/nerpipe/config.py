"""Pipeline configuration: dataclasses plus a JSON file loader.

Secrets never live here; clients read API keys from the environment
variable named by ``api_key_env``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NerPipeError
from .paraphrase import ParaphraseConfig


class ConfigError(NerPipeError):
    """Unusable configuration file or settings."""


@dataclass
class LlmSettings:
    base_url: str = ""
    model: str = ""
    api_key_env: str = "NERPIPE_API_KEY"


@dataclass
class EmbedderSettings:
    kind: str = "tf"  # "tf" (offline) or "remote"
    base_url: str = ""
    model: str = ""
    api_key_env: str = "NERPIPE_API_KEY"
    timeout: float = 60.0


@dataclass
class FilterSettings:
    min_words: int = 10
    english_only: bool = True
    label_allowlist: list[str] | None = None
    drop_unannotated: bool = False


@dataclass
class PipelineConfig:
    llm: LlmSettings = field(default_factory=LlmSettings)
    embedder: EmbedderSettings = field(default_factory=EmbedderSettings)
    paraphrase: ParaphraseConfig = field(default_factory=ParaphraseConfig)
    filter: FilterSettings = field(default_factory=FilterSettings)
    max_tokens: int = 2048
    seed: int = 0


def _build(cls, raw: dict, where: str):
    allowed = {f for f in cls.__dataclass_fields__}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | Path | None) -> PipelineConfig:
    """Load a JSON config file; a missing path yields all defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    known = {"llm", "embedder", "paraphrase", "filter", "max_tokens", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return PipelineConfig(
        llm=_build(LlmSettings, raw.get("llm", {}), f"{path}:llm"),
        embedder=_build(EmbedderSettings, raw.get("embedder", {}), f"{path}:embedder"),
        paraphrase=_build(
            ParaphraseConfig, raw.get("paraphrase", {}), f"{path}:paraphrase"
        ),
        filter=_build(FilterSettings, raw.get("filter", {}), f"{path}:filter"),
        max_tokens=int(raw.get("max_tokens", 2048)),
        seed=int(raw.get("seed", 0)),
    )
