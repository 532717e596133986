"""Application settings: defaults, a flat ``key = value`` file, CLI overrides.

Precedence is command-line flag, then config file, then built-in default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

from .alpha import AlphaParams
from .forest import ForestConfig
from .pipeline import AlphaScope


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AppConfig:
    beta: float = 5.0
    gamma: float = 2.0
    alpha_scope: str = AlphaScope.CANDIDATES.value
    n_trees: int = 100
    max_depth: int = 8
    min_samples_split: int = 2
    features_per_split: int = 2
    augment: int = 3
    split_ratio: float = 0.8
    seed: int = 42
    strict_ingest: bool = False

    def __post_init__(self) -> None:
        try:
            AlphaScope(self.alpha_scope)
            self.alpha_params()
            self.forest_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.augment < 0:
            raise ConfigError("augment must be >= 0")

    def alpha_params(self) -> AlphaParams:
        return AlphaParams(self.beta, self.gamma)

    def forest_config(self) -> ForestConfig:
        return ForestConfig(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            features_per_split=self.features_per_split,
            seed=self.seed,
        )

    def with_overrides(self, values: Mapping[str, Any]) -> "AppConfig":
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in values.items() if v is not None})


def _coerce(name: str, text: str) -> Any:
    kind = {f.name: f.type for f in fields(AppConfig)}[name]
    try:
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    known = {f.name for f in fields(AppConfig)}
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path: str | os.PathLike | None = None,
                overrides: Mapping[str, Any] | None = None) -> AppConfig:
    cfg = AppConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg = cfg.with_overrides(parse_config_text(fh.read(), str(path)))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg
