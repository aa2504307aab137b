"""Command-line entry point: ``loccat <verb> [flags]``.

Exit status: 0 on success, 1 for data errors (unparsable input, missing
documents, unreadable files), 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from loccat.analysis import ConfigError, Lexicon, Tokenizer, load_lexicon
from loccat.config import PRESETS, ConfigKeyError, ScoringConfig, load_config, preset
from loccat.corpus import ParseError, parse_collection, parse_qrels, parse_topics
from loccat.evaluation import ablation_table, evaluate, format_run, read_run
from loccat.index import IndexFormatError, build_index, load_index, save_index
from loccat.scoring import ScoreBreakdown, explain, retrieve
from loccat.sweep import TopicSet, resolve_grid, run_sweep


class DataError(Exception):
    pass


class UsageError(Exception):
    pass


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _words(path: str | None) -> frozenset[str]:
    if path is None:
        return frozenset()
    text = _read_bytes(path).decode("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def _config(source: str | None, default: str | None = None) -> ScoringConfig:
    source = source or default
    if source is None:
        return ScoringConfig()
    try:
        if source in PRESETS and not Path(source).exists():
            return preset(source)
        return load_config(source)
    except OSError as exc:
        raise UsageError(f"cannot read config {source}: {exc.strerror}") from None
    except (ConfigKeyError, ValueError) as exc:
        raise UsageError(f"config {source}: {exc}") from None


def _load_index(path: str):
    try:
        return load_index(path)
    except OSError as exc:
        raise DataError(f"cannot read index {path}: {exc.strerror}") from None


def cmd_build_index(args) -> int:
    try:
        tokenizer = Tokenizer(args.tokenizer, _words(args.dict), _words(args.stop_tokens),
                              lowercase=args.lowercase)
        lexicon = load_lexicon(args.lexicon) if args.lexicon else Lexicon()
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    except OSError as exc:
        raise DataError(f"cannot read lexicon: {exc.strerror}") from None
    docs = parse_collection(_read_bytes(args.corpus), tokenizer)
    index = build_index(docs, tokenizer, lexicon, positional=not args.no_positions)
    save_index(index, args.out)
    stats = index.stats
    print(f"N={stats.n_docs}")
    print(f"avg_length={stats.avg_length:.4f}")
    print(f"vocabulary={len(index.vocabulary)}")
    for category, count in sorted(Counter(stats.category_of).items()):
        print(f"category[{category}]={count}")
    return 0


def cmd_search(args) -> int:
    cfg = _config(args.config)
    index = _load_index(args.index)
    topics = parse_topics(_read_bytes(args.topics), index.tokenizer)
    runs = [retrieve(t, index, cfg, with_breakdowns=False)[0] for t in topics]
    Path(args.out).write_text(format_run(runs, args.tag), encoding="utf-8")
    return 0


def cmd_evaluate(args) -> int:
    try:
        runs = read_run(args.run)
    except OSError as exc:
        raise DataError(f"cannot read run {args.run}: {exc.strerror}") from None
    judgments = parse_qrels(_read_bytes(args.qrels), args.grade)
    report = evaluate(runs, judgments)
    print(report.table(), end="")
    for topic_id in report.flagged:
        print(f"# topic {topic_id}: no relevant documents, excluded from averages")
    print(report.dump(), end="")
    return 0


def _explain_table(b: ScoreBreakdown) -> str:
    head = ("surface", "source", "tf", "df", "TF", "IDF", "TF_q", "K_detail",
            "K_location", "weight", "contribution")
    rows = [head]
    for t in b.terms:
        rows.append((t.surface + (" [NEG]" if t.neg else ""), t.source, str(t.tf), str(t.df),
                     *(f"{v:.6f}" for v in (t.tf_part, t.idf_part, t.tfq_part, t.k_detail,
                                            t.k_location, t.extraction_weight, t.contribution))))
    rows.append(("(length term)", "", "", "", "", "", "", "", "", "", f"{b.length_term:.6f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) if i < 2 else c.rjust(w)
                       for i, (c, w) in enumerate(zip(r, widths))).rstrip() for r in rows]
    lines.append(f"K_category = {b.k_category:.12f}")
    lines.append(f"total = {b.total:.12f}")
    return "\n".join(lines) + "\n"


def cmd_explain(args) -> int:
    cfg = _config(args.config)
    index = _load_index(args.index)
    topics = {t.topic_id: t for t in parse_topics(_read_bytes(args.topics), index.tokenizer)}
    if args.topic_id not in topics:
        raise DataError(f"unknown topic {args.topic_id}")
    if args.doc_id not in index:
        raise DataError(f"unknown document {args.doc_id}")
    print(_explain_table(explain(topics[args.topic_id], args.doc_id, index, cfg)), end="")
    return 0


def cmd_sweep(args) -> int:
    base = _config(args.config, default="system_a")
    try:
        header, grid = resolve_grid(args.grid, base)
    except OSError as exc:
        raise UsageError(f"cannot read grid {args.grid}: {exc.strerror}") from None
    except (ConfigKeyError, ValueError) as exc:
        raise UsageError(f"grid {args.grid}: {exc}") from None
    index = _load_index(args.index)

    def topic_set(name, topics, qa, qb):
        return TopicSet(name, parse_topics(_read_bytes(topics), index.tokenizer),
                        parse_qrels(_read_bytes(qa), "A"), parse_qrels(_read_bytes(qb), "B"))

    sets = [topic_set("formal", args.topics, args.qrels_a, args.qrels_b)]
    prelim = (args.prelim_topics, args.prelim_qrels_a, args.prelim_qrels_b)
    if any(prelim):
        if not all(prelim):
            raise UsageError("--prelim-topics, --prelim-qrels-a and --prelim-qrels-b go together")
        sets.append(topic_set("prelim", *prelim))
    results = run_sweep(index, grid, sets)
    names = [s.name for s in sets] if len(sets) > 1 else [""]
    print(ablation_table(results, names, header), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loccat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("build-index", help="parse a collection and write an index file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tokenizer", choices=("whitespace", "dictionary"), default="whitespace")
    p.add_argument("--dict", help="word list for dictionary tokenization")
    p.add_argument("--lexicon", help="sectioned lexicon file")
    p.add_argument("--stop-tokens", help="tokens never used as query terms, one per line")
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--no-positions", action="store_true",
                   help="omit positions (multi-unit query terms then fail)")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("search", help="rank documents for every topic, write a TREC run")
    p.add_argument("--index", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--config", required=True, help="config file or preset name")
    p.add_argument("--out", required=True)
    p.add_argument("--tag", default="loccat")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("evaluate", help="R-Precision and Average Precision of a run")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--grade", choices=("A", "B"), required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="per-term score breakdown for one document")
    p.add_argument("--index", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--topic-id", required=True)
    p.add_argument("--doc-id", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("sweep", help="evaluate a grid of configurations")
    p.add_argument("--index", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--qrels-a", required=True)
    p.add_argument("--qrels-b", required=True)
    p.add_argument("--grid", required=True, help="extensions8, methods, or a grid file")
    p.add_argument("--config", help="base config or preset (default: system_a)")
    p.add_argument("--prelim-topics")
    p.add_argument("--prelim-qrels-a")
    p.add_argument("--prelim-qrels-b")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"loccat {args.verb}: {exc}", file=sys.stderr)
        return 2
    except (DataError, ParseError, IndexFormatError, UnicodeDecodeError, OSError) as exc:
        print(f"loccat {args.verb}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
