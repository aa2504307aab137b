"""Ablation grids: which configurations to run and how to run them."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from loccat.config import ScoringConfig, parse_config
from loccat.corpus import JudgmentSet, Topic
from loccat.evaluation import EvalReport, evaluate
from loccat.index import InvertedIndex
from loccat.scoring import retrieve

EXTENSIONS_HEADER = "K_location K_category K_detail"

# all on first, all off last
_EXTENSION_ROWS = (
    (True, True, True),
    (True, True, False),
    (True, False, True),
    (False, True, True),
    (True, False, False),
    (False, True, False),
    (False, False, True),
    (False, False, False),
)

_METHOD_ROWS = (
    ("shortest", {}),
    ("all_patterns", {}),
    ("lattice", {}),
    ("downweight k_down=0.01", {"k_down": 0.01}),
    ("downweight k_down=0.1", {"k_down": 0.1}),
)


@dataclass(frozen=True)
class TopicSet:
    name: str
    topics: Sequence[Topic]
    qrels_a: JudgmentSet
    qrels_b: JudgmentSet


def with_extensions(base: ScoringConfig, location: bool, category: bool,
                    detail: bool) -> ScoringConfig:
    cfg = base
    if not location:
        cfg = cfg.without_location()
    if not category:
        cfg = cfg.without_category()
    if not detail:
        cfg = cfg.without_detail()
    return cfg


def extensions8(base: ScoringConfig) -> list[tuple[str, ScoringConfig]]:
    yes_no = {True: "yes", False: "no"}
    return [(" ".join(yes_no[flag] for flag in row), with_extensions(base, *row))
            for row in _EXTENSION_ROWS]


def methods_grid(base: ScoringConfig) -> list[tuple[str, ScoringConfig]]:
    grid = []
    for block, on in (("all-ext", True), ("no-ext", False)):
        for name, extra in _METHOD_ROWS:
            method = name.split()[0]
            cfg = with_extensions(base.replace(extraction_method=method, **extra), on, on, on)
            grid.append((f"{block} {name}", cfg))
    return grid


def parse_grid(text: str, base: ScoringConfig) -> list[tuple[str, ScoringConfig]]:
    """Grid file: one ``label: key = value, key = value`` line per row."""
    grid = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, sep, overrides = line.partition(":")
        if not sep or not label.strip():
            raise ValueError(f"grid line {lineno}: expected 'label: key = value, ...'")
        cfg = parse_config("\n".join(overrides.split(",")), base)
        grid.append((label.strip(), cfg))
    return grid


def resolve_grid(source: str, base: ScoringConfig) -> tuple[str, list[tuple[str, ScoringConfig]]]:
    """Built-in grid name or path to a grid file -> (label header, rows)."""
    if source == "extensions8":
        return EXTENSIONS_HEADER, extensions8(base)
    if source == "methods":
        return "Method", methods_grid(base)
    return "Configuration", parse_grid(Path(source).read_text(encoding="utf-8"), base)


def run_sweep(index: InvertedIndex, grid: list[tuple[str, ScoringConfig]],
              topic_sets: Sequence[TopicSet]) -> dict[str, list[tuple[EvalReport, EvalReport]]]:
    results: dict[str, list[tuple[EvalReport, EvalReport]]] = {}
    for label, cfg in grid:
        if label in results:
            raise ValueError(f"duplicate grid label {label!r}")
        blocks = []
        for ts in topic_sets:
            runs = [retrieve(t, index, cfg, with_breakdowns=False)[0] for t in ts.topics]
            blocks.append((evaluate(runs, ts.qrels_a), evaluate(runs, ts.qrels_b)))
        results[label] = blocks
    return results
