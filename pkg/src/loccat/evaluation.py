"""R-Precision / Average Precision, TREC run files, and ablation tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from loccat.corpus import JudgmentSet, ParseError
from loccat.scoring import RankedRun


class UndefinedMetric(ValueError):
    """Raised when a topic has no relevant documents (R = 0)."""


def _doc_ids(run: RankedRun | Sequence[str]) -> list[str]:
    return run.doc_ids() if isinstance(run, RankedRun) else list(run)


def r_precision(run: RankedRun | Sequence[str], relevant: set[str]) -> float:
    r = len(relevant)
    if r == 0:
        raise UndefinedMetric("R-Precision is undefined without relevant documents")
    return sum(1 for d in _doc_ids(run)[:r] if d in relevant) / r


def average_precision(run: RankedRun | Sequence[str], relevant: set[str]) -> float:
    r = len(relevant)
    if r == 0:
        raise UndefinedMetric("Average Precision is undefined without relevant documents")
    # exact rational sum, rounded once
    hits = 0
    total = Fraction(0)
    for rank, doc in enumerate(_doc_ids(run), 1):
        if doc in relevant:
            hits += 1
            total += Fraction(hits, rank)
    return float(total / r)


@dataclass
class TopicMetrics:
    num_relevant: int
    r_precision: float | None
    avg_precision: float | None


@dataclass
class EvalReport:
    per_topic: dict[str, TopicMetrics] = field(default_factory=dict)
    r_precision: float | None = None
    avg_precision: float | None = None

    @property
    def flagged(self) -> list[str]:
        """Topics left out of the macro averages (no relevant documents)."""
        return [t for t, m in self.per_topic.items() if m.num_relevant == 0]

    def dump(self) -> str:
        lines = []
        for topic_id, m in self.per_topic.items():
            lines.append(f"{topic_id}.num_relevant = {m.num_relevant}")
            lines.append(f"{topic_id}.r_precision = {_fmt(m.r_precision)}")
            lines.append(f"{topic_id}.avg_precision = {_fmt(m.avg_precision)}")
        lines.append(f"all.r_precision = {_fmt(self.r_precision)}")
        lines.append(f"all.avg_precision = {_fmt(self.avg_precision)}")
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        rows = [("topic", "R", "R-Prec", "AveP")]
        for topic_id, m in self.per_topic.items():
            rows.append((topic_id, str(m.num_relevant), _fmt(m.r_precision), _fmt(m.avg_precision)))
        rows.append(("all", "", _fmt(self.r_precision), _fmt(self.avg_precision)))
        return _align(rows)


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def evaluate(runs: Iterable[RankedRun], judgments: JudgmentSet) -> EvalReport:
    report = EvalReport()
    for run in runs:
        if run.topic_id in report.per_topic:
            raise ValueError(f"topic {run.topic_id} has more than one run")
        relevant = judgments.relevant(run.topic_id)
        if relevant:
            report.per_topic[run.topic_id] = TopicMetrics(
                len(relevant), r_precision(run, relevant), average_precision(run, relevant))
        else:
            report.per_topic[run.topic_id] = TopicMetrics(0, None, None)
    scored = [m for m in report.per_topic.values() if m.num_relevant]
    report.r_precision = _mean([m.r_precision for m in scored])
    report.avg_precision = _mean([m.avg_precision for m in scored])
    return report


def _align(rows: list[tuple[str, ...]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(w) if i == 0 else cell.rjust(w)
                  for i, (cell, w) in enumerate(zip(row, widths))).rstrip()
        for row in rows) + "\n"


def ablation_table(reports: dict[str, Sequence[tuple[EvalReport, EvalReport]]],
                   block_names: Sequence[str] = ("",),
                   label_header: str = "Configuration") -> str:
    """Rows per configuration; R-Precision and AveP under A and B per block.

    ``reports`` maps a row label to one (A-judgment, B-judgment) report pair
    per block.  A bare pair is accepted for single-block tables.
    """
    metric_heads = ("RPrec-A", "RPrec-B", "AveP-A", "AveP-B")
    header = [label_header]
    for name in block_names:
        header.extend(f"{name}:{m}" if name else m for m in metric_heads)
    rows = [tuple(header)]
    for label, blocks in reports.items():
        if len(blocks) == 2 and isinstance(blocks[0], EvalReport):
            blocks = [blocks]
        if len(blocks) != len(block_names):
            raise ValueError(f"row {label!r} has {len(blocks)} blocks, expected {len(block_names)}")
        row = [label]
        for a, b in blocks:
            row.extend(_fmt(v) for v in (a.r_precision, b.r_precision,
                                         a.avg_precision, b.avg_precision))
        rows.append(tuple(row))
    return _align(rows)


def format_run(runs: Iterable[RankedRun], tag: str = "loccat") -> str:
    lines = []
    for run in runs:
        for rank, (doc_id, score) in enumerate(run.entries, 1):
            lines.append(f"{run.topic_id} Q0 {doc_id} {rank} {score:.12f} {tag}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_run(text: str) -> list[RankedRun]:
    """Read TREC run lines; entries are ordered by the rank column."""
    rows: dict[str, list[tuple[int, str, float]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 6:
            raise ParseError(f"expected 6 fields, got {len(parts)}", line=lineno)
        topic_id, _q0, doc_id, rank, score, _tag = parts
        try:
            rows.setdefault(topic_id, []).append((int(rank), doc_id, float(score)))
        except ValueError:
            raise ParseError("bad rank or score", line=lineno) from None
    return [RankedRun(t, [(d, s) for _, d, s in sorted(entries)])
            for t, entries in rows.items()]


def read_run(path: str | Path) -> list[RankedRun]:
    return parse_run(Path(path).read_text(encoding="utf-8"))
