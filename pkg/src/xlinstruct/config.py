"""Pipeline configuration: one structured file, flag overrides, and a
deterministic effective-config echo stamped into every output's metadata."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .backends import (
    DEFAULT_AUTH_ENV,
    ChatBackend,
    DecodingConfig,
    HttpChatBackend,
    MockBackend,
    ScriptedBackend,
    load_script,
)
from .dataset import default_rules_path
from .judging import JudgeConfig
from .scoring import BleuConfig, GembaConfig, ScorerEndpoint
from .translation import TranslationConfig


class ConfigError(ValueError):
    """Raised for unusable configuration files or values."""


@dataclass(frozen=True)
class BackendSettings:
    kind: str = "mock"  # "mock" | "openai_chat"
    endpoint: str = ""
    model: str = "gpt-4"
    auth_env: str = DEFAULT_AUTH_ENV
    mock_mode: str = "tag"
    mock_tag: str = "ko"
    script_path: str = ""


@dataclass(frozen=True)
class LanguageSettings:
    source: str = "English"
    target: str = "Korean"
    target_people: str = "Koreans"


@dataclass(frozen=True)
class RetrySettings:
    max_retries: int = 3
    backoff_base: float = 0.5
    backoff_cap: float = 8.0


@dataclass(frozen=True)
class LimitSettings:
    max_in_flight: int = 1
    requests_per_minute: int | None = None
    max_payload_chars: int | None = None


@dataclass(frozen=True)
class MetricSettings:
    tokenizer: str = "whitespace"
    smoothing: str = "epsilon"
    external_kind: str = ""  # "", "http", "subprocess"
    external_url: str = ""
    external_argv: tuple[str, ...] = ()
    external_scale: str = "0-1"


@dataclass(frozen=True)
class PathSettings:
    corpus: str = ""
    checkpoint: str = ""
    output_dir: str = "out"


@dataclass(frozen=True)
class PipelineConfig:
    backend: BackendSettings = field(default_factory=BackendSettings)
    languages: LanguageSettings = field(default_factory=LanguageSettings)
    decoding: DecodingConfig = field(default_factory=DecodingConfig)
    retry: RetrySettings = field(default_factory=RetrySettings)
    limits: LimitSettings = field(default_factory=LimitSettings)
    metrics: MetricSettings = field(default_factory=MetricSettings)
    paths: PathSettings = field(default_factory=PathSettings)
    category_rules: str = ""
    seed: int = 0
    use_function_calling: bool = True
    directive_phrases: tuple[str, ...] = ("translate", "번역")


_SECTIONS = {
    "backend": BackendSettings,
    "languages": LanguageSettings,
    "decoding": DecodingConfig,
    "retry": RetrySettings,
    "limits": LimitSettings,
    "metrics": MetricSettings,
    "paths": PathSettings,
}


def _build_section(cls: type, data: dict[str, Any], where: str) -> Any:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    coerced = dict(data)
    if "external_argv" in coerced and coerced["external_argv"] is not None:
        coerced["external_argv"] = tuple(coerced["external_argv"])
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {where} section: {exc}") from exc


def config_from_dict(data: dict[str, Any]) -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        elif key == "directive_phrases":
            kwargs[key] = tuple(value)
        elif key in ("category_rules", "seed", "use_function_calling"):
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config key: {key!r}")
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> PipelineConfig:
    """Load a JSON (default) or YAML (by suffix) configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"unparseable config {path}: {exc}") from exc
    return config_from_dict(data)


def effective_config(config: PipelineConfig) -> dict[str, Any]:
    """Plain sorted dict of the whole configuration, for provenance echoes."""

    def convert(value: Any) -> Any:
        if dataclasses.is_dataclass(value) and not isinstance(value, type):
            return {k: convert(v) for k, v in sorted(dataclasses.asdict(value).items())}
        if isinstance(value, tuple):
            return list(value)
        if isinstance(value, dict):
            return {k: convert(v) for k, v in sorted(value.items())}
        return value

    return {f.name: convert(getattr(config, f.name)) for f in dataclasses.fields(config)}


def build_backend(config: PipelineConfig) -> ChatBackend:
    settings = config.backend
    if settings.kind == "mock":
        mock = MockBackend(mode=settings.mock_mode, tag=settings.mock_tag)
        if settings.script_path:
            return ScriptedBackend(load_script(settings.script_path), fallback=mock)
        return mock
    if settings.kind == "openai_chat":
        if not settings.endpoint:
            raise ConfigError("backend.endpoint required for openai_chat")
        return HttpChatBackend(
            endpoint=settings.endpoint, model=settings.model, auth_env=settings.auth_env
        )
    raise ConfigError(f"unknown backend kind: {settings.kind!r}")


def translation_config(config: PipelineConfig) -> TranslationConfig:
    return TranslationConfig(
        source_language=config.languages.source,
        target_language=config.languages.target,
        target_people=config.languages.target_people,
        decoding=config.decoding,
        use_function_calling=config.use_function_calling,
        max_retries=config.retry.max_retries,
        backoff_base=config.retry.backoff_base,
        backoff_cap=config.retry.backoff_cap,
        max_in_flight=config.limits.max_in_flight,
        requests_per_minute=config.limits.requests_per_minute,
        max_payload_chars=config.limits.max_payload_chars,
    )


def judge_config(config: PipelineConfig) -> JudgeConfig:
    return JudgeConfig(
        decoding=config.decoding,
        max_retries=config.retry.max_retries,
        backoff_base=config.retry.backoff_base,
        backoff_cap=config.retry.backoff_cap,
        max_in_flight=config.limits.max_in_flight,
        requests_per_minute=config.limits.requests_per_minute,
    )


def gemba_config(config: PipelineConfig) -> GembaConfig:
    return GembaConfig(
        source_language=config.languages.source,
        target_language=config.languages.target,
        decoding=config.decoding,
        max_retries=config.retry.max_retries,
        backoff_base=config.retry.backoff_base,
        backoff_cap=config.retry.backoff_cap,
        max_in_flight=config.limits.max_in_flight,
        requests_per_minute=config.limits.requests_per_minute,
    )


def bleu_config(config: PipelineConfig) -> BleuConfig:
    return BleuConfig(tokenizer=config.metrics.tokenizer, smoothing=config.metrics.smoothing)


def scorer_endpoint(config: PipelineConfig) -> ScorerEndpoint | None:
    metrics = config.metrics
    if not metrics.external_kind:
        return None
    return ScorerEndpoint(
        kind=metrics.external_kind,
        url=metrics.external_url or None,
        argv=metrics.external_argv or None,
        scale=metrics.external_scale,
    )


def rules_path(config: PipelineConfig) -> Path:
    return Path(config.category_rules) if config.category_rules else default_rules_path()
