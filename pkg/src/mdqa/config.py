"""Run configuration: built-in defaults < JSON config file < environment < CLI flags."""

from __future__ import annotations

import copy
import json
import os
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .corpus import Mode
from .docfilter import DEFAULT_THRESHOLDS, FilterConfig
from .embedding import ProviderConfig
from .ensemble import Quantizer
from .errors import ConfigError

DEFAULTS: dict[str, Any] = {
    "beta": 1.0,
    "template": "plain",
    "mode": "multi",
    "workers": None,
    "strict": False,
    "word_boundary": False,
    "provider": {
        "kind": "local",
        "dimension": 1024,
        "base_url": None,
        "model_name": None,
        "batch_size": 32,
        "max_retries": 3,
        "timeout": 30.0,
        "max_concurrency": 4,
        "api_key_env": "EMBED_API_KEY",
    },
    "filter": {
        "thresholds": {k: list(v) for k, v in DEFAULT_THRESHOLDS.items()},
        "embed_with_history": False,
        "lexical_with_history": False,
        "action": "report",
    },
    "ensemble": {"quantizer": "emb_a_s", "with_question": False},
}

# env var -> (dotted config key, parser)
ENV_VARS: dict[str, tuple[str, Any]] = {
    "MDQA_BETA": ("beta", float),
    "MDQA_TEMPLATE": ("template", str),
    "MDQA_WORKERS": ("workers", int),
    "MDQA_PROVIDER": ("provider.kind", str),
    "MDQA_EMBED_URL": ("provider.base_url", str),
    "MDQA_EMBED_MODEL": ("provider.model_name", str),
    "MDQA_EMBED_DIM": ("provider.dimension", int),
}


def _set(tree: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    node = tree
    for key in parents:
        node = node.setdefault(key, {})
    node[leaf] = value


def deep_merge(base: dict[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config_file(path: str | Path) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON config: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def env_overrides(env: Mapping[str, str]) -> dict[str, Any]:
    tree: dict[str, Any] = {}
    for name, (key, parse) in ENV_VARS.items():
        if name in env and env[name] != "":
            try:
                _set(tree, key, parse(env[name]))
            except ValueError:
                raise ConfigError(f"environment variable {name}={env[name]!r} is not a valid {parse.__name__}") from None
    return tree


@dataclass(frozen=True)
class RunConfig:
    beta: float
    template: str
    mode: Mode
    workers: int
    strict: bool
    word_boundary: bool
    provider: ProviderConfig
    filter: FilterConfig
    quantizer: Quantizer
    ensemble_with_question: bool
    resolved: dict[str, Any]

    def echo(self) -> dict[str, Any]:
        """Resolved settings for output metadata. Worker count is excluded so outputs do not depend on it."""
        tree = copy.deepcopy(self.resolved)
        tree.pop("workers", None)
        return tree


def resolve(
    flags: Mapping[str, Any] | None = None,
    config_path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge layers. ``flags`` is a nested dict holding only explicitly given options."""
    tree = copy.deepcopy(DEFAULTS)
    if config_path is not None:
        tree = deep_merge(tree, load_config_file(config_path))
    tree = deep_merge(tree, env_overrides(os.environ if env is None else env))
    if flags:
        tree = deep_merge(tree, flags)
    if tree["workers"] is None:
        tree["workers"] = os.cpu_count() or 1

    try:
        beta = float(tree["beta"])
        if not beta > 0:
            raise ConfigError(f"beta must be positive, got {beta}")
        workers = int(tree["workers"])
        if workers < 1:
            raise ConfigError(f"workers must be >= 1, got {workers}")
        provider = ProviderConfig(**tree["provider"])
        f = tree["filter"]
        filt = FilterConfig(
            thresholds={k: tuple(v) for k, v in f["thresholds"].items()},
            embed_with_history=bool(f["embed_with_history"]),
            lexical_with_history=bool(f["lexical_with_history"]),
            action=f["action"],
            beta=beta,
        )
        return RunConfig(
            beta=beta,
            template=str(tree["template"]),
            mode=Mode(tree["mode"]),
            workers=workers,
            strict=bool(tree["strict"]),
            word_boundary=bool(tree["word_boundary"]),
            provider=provider,
            filter=filt,
            quantizer=Quantizer(tree["ensemble"]["quantizer"]),
            ensemble_with_question=bool(tree["ensemble"]["with_question"]),
            resolved=tree,
        )
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from None
