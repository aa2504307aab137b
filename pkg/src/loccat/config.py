"""Scoring constants and the flat ``key = value`` config format."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

METHODS = ("shortest", "all_patterns", "lattice", "downweight")

DETAIL_KEYS = ("k_descr", "k_proper", "k_nado", "k_num", "k_hira", "k_neg",
               "k_stopword_1", "k_stopword_2")

PRESETS = ("system_a", "system_b")


class ConfigKeyError(KeyError):
    """Unknown or malformed key in a config file."""

    def __init__(self, key: str, message: str):
        super().__init__(key)
        self.key = key
        self.message = message

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ScoringConfig:
    k_t: float = 1.0
    k_q: float = 0.0
    k_location_1: float = 1.0
    k_location_2: float = 0.0
    k_category: float = 0.0
    k_descr: float = 1.0
    k_proper: float = 1.0
    k_nado: float = 1.0
    k_num: float = 1.0
    k_hira: float = 1.0
    k_neg: float = 1.0
    k_stopword_1: float = 1.0
    k_stopword_2: float = 1.0
    k_down: float = 0.1
    use_length_term: bool = False
    feedback_depth: int = 100
    extraction_method: str = "shortest"
    results_per_topic: int = 300

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.type == "float" and not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value}")
        if self.k_t < 0 or self.k_q < 0:
            raise ValueError("k_t and k_q must be >= 0")
        if self.k_location_1 <= 0 or self.k_location_2 < 0:
            raise ValueError("k_location_1 must be > 0 and k_location_2 >= 0")
        if self.k_category < 0:
            raise ValueError("k_category must be >= 0")
        if not 0.0 <= self.k_down <= 1.0:
            raise ValueError(f"k_down must lie in [0, 1], got {self.k_down}")
        if self.feedback_depth < 1 or self.results_per_topic < 1:
            raise ValueError("feedback_depth and results_per_topic must be >= 1")
        if self.extraction_method not in METHODS:
            raise ValueError(f"extraction_method must be one of {METHODS}")

    def replace(self, **changes) -> ScoringConfig:
        return dataclasses.replace(self, **changes)

    def without_location(self) -> ScoringConfig:
        return self.replace(k_location_1=1.0, k_location_2=0.0)

    def without_category(self) -> ScoringConfig:
        return self.replace(k_category=0.0)

    def without_detail(self) -> ScoringConfig:
        # the document-length term is grouped with the detail factors
        return self.replace(use_length_term=False, **{k: 1.0 for k in DETAIL_KEYS})

    def neutral(self) -> ScoringConfig:
        """Constants that reduce the extended score to plain BM11."""
        return self.without_location().without_category().without_detail()


def _convert(key: str, kind: str, raw: str):
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigKeyError(key, f"{key}: expected a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigKeyError(key, f"{key}: expected {kind}, got {raw!r}") from None
    return raw


def parse_config(text: str, base: ScoringConfig | None = None) -> ScoringConfig:
    kinds = {f.name: f.type for f in dataclasses.fields(ScoringConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise ConfigKeyError(key, f"line {lineno}: expected 'key = value'")
        if key not in kinds:
            raise ConfigKeyError(key, f"line {lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigKeyError(key, f"line {lineno}: {key} set twice")
        values[key] = _convert(key, kinds[key], value)
    return dataclasses.replace(base or ScoringConfig(), **values)


def load_config(path: str | Path) -> ScoringConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def preset(name: str) -> ScoringConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("loccat.presets").joinpath(f"{name}.cfg").read_text(encoding="utf-8")
    return parse_config(text)


def format_config(cfg: ScoringConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
