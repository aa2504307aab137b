"""Tokenization, lexical attributes and query-term extraction.

Four extraction strategies are provided. All of them work on *runs*: maximal
stretches of content tokens between punctuation, hard stopwords and other
non-content tokens.  A run of ``n`` shortest terms yields ``n(n+1)/2``
contiguous spans; the strategies differ in which spans they keep and how the
spans are weighted.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterator

from loccat.corpus import Topic

MAX_RUN_UNITS = 12

DESCRIPTION = "description"
NARRATIVE = "narrative"

FLAGS = ("proper", "nado", "numeric", "hiragana_only",
         "soft_stopword", "hard_stopword", "neg")

_WORD_RE = re.compile(r"\w+|[^\w\s]")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tokenizer:
    mode: str = "whitespace"
    dictionary: frozenset[str] = frozenset()
    # tokens dropped from query terms altogether (function words and the like)
    stop_tokens: frozenset[str] = frozenset()
    punct_categories: tuple[str, ...] = ("P", "S")
    lowercase: bool = False

    def __post_init__(self):
        if self.mode not in ("whitespace", "dictionary"):
            raise ConfigError(f"unknown tokenizer mode {self.mode!r}")
        if self.mode == "dictionary" and not self.dictionary:
            raise ConfigError("dictionary mode needs a non-empty dictionary")

    @cached_property
    def _longest_word(self) -> int:
        return max((len(w) for w in self.dictionary), default=1)

    @property
    def joiner(self) -> str:
        """Glue used to spell a multi-unit term."""
        return " " if self.mode == "whitespace" else ""

    def tokenize(self, text: str) -> list[str]:
        if self.lowercase:
            text = text.lower()
        if self.mode == "whitespace":
            return _WORD_RE.findall(text)
        tokens = []
        for chunk in text.split():
            i = 0
            while i < len(chunk):
                for j in range(min(len(chunk), i + self._longest_word), i, -1):
                    if chunk[i:j] in self.dictionary:
                        break
                else:
                    j = i + 1
                tokens.append(chunk[i:j])
                i = j
        return tokens

    def is_punct(self, token: str) -> bool:
        return all(unicodedata.category(c)[0] in self.punct_categories for c in token)


def tokenize(text: str, tokenizer: Tokenizer) -> list[str]:
    return tokenizer.tokenize(text)


@dataclass(frozen=True)
class Lexicon:
    proper_nouns: frozenset[str] = frozenset()
    hard_stopwords: frozenset[str] = frozenset()
    soft_stopwords: frozenset[str] = frozenset()
    nado_particles: frozenset[str] = frozenset()
    numeric_pattern: str = "[0-9]"
    hira_pattern: str = "[ぁ-ゟ]"

    def __post_init__(self):
        overlap = self.hard_stopwords & self.soft_stopwords
        if overlap:
            raise ConfigError(f"words are both hard and soft stopwords: {sorted(overlap)}")
        for pattern in (self.numeric_pattern, self.hira_pattern):
            try:
                re.compile(pattern)
            except re.error as exc:
                raise ConfigError(f"bad character class {pattern!r}: {exc}") from None

    @cached_property
    def _numeric_re(self) -> re.Pattern:
        return re.compile(f"(?:{self.numeric_pattern})+")

    @cached_property
    def _hira_re(self) -> re.Pattern:
        return re.compile(f"(?:{self.hira_pattern})+")

    def is_numeric(self, token: str) -> bool:
        return self._numeric_re.fullmatch(token) is not None

    def is_hiragana(self, token: str) -> bool:
        return self._hira_re.fullmatch(token) is not None


_LEXICON_SETS = ("proper_nouns", "hard_stopwords", "soft_stopwords", "nado_particles")
_LEXICON_PATTERNS = ("numeric_pattern", "hira_pattern")


def parse_lexicon(text: str) -> Lexicon:
    sets: dict[str, set[str]] = {name: set() for name in _LEXICON_SETS}
    patterns: dict[str, str] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]") and line[1:-1] in (*_LEXICON_SETS, *_LEXICON_PATTERNS):
            section = line[1:-1]
            continue
        if section is None:
            raise ConfigError(f"lexicon line {lineno}: entry before any section")
        if section in _LEXICON_PATTERNS:
            if section in patterns:
                raise ConfigError(f"lexicon line {lineno}: [{section}] takes a single expression")
            patterns[section] = line
        else:
            sets[section].add(line)
    return Lexicon(**{k: frozenset(v) for k, v in sets.items()}, **patterns)


def load_lexicon(path: str | Path) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def format_lexicon(lexicon: Lexicon) -> str:
    out = []
    for name in _LEXICON_SETS:
        out.append(f"[{name}]")
        out.extend(sorted(getattr(lexicon, name)))
    for name in _LEXICON_PATTERNS:
        out.append(f"[{name}]")
        out.append(getattr(lexicon, name))
    return "\n".join(out) + "\n"


def attribute_of(token: str, following: str | None, lexicon: Lexicon) -> frozenset[str]:
    return _span_attributes((token,), token, following, lexicon)


def _span_attributes(units: tuple[str, ...], surface: str, following: str | None,
                     lexicon: Lexicon) -> frozenset[str]:
    flags = set()
    if surface in lexicon.proper_nouns or any(u in lexicon.proper_nouns for u in units):
        flags.add("proper")
    if following is not None and following in lexicon.nado_particles:
        flags.add("nado")
    if all(lexicon.is_numeric(u) for u in units):
        flags.add("numeric")
    if all(lexicon.is_hiragana(u) for u in units):
        flags.add("hiragana_only")
    if all(u in lexicon.soft_stopwords for u in units):
        flags.add("soft_stopword")
    if surface in lexicon.hard_stopwords:
        flags.add("hard_stopword")
    return frozenset(flags)


def _is_content(token: str, lexicon: Lexicon, tokenizer: Tokenizer) -> bool:
    return not (tokenizer.is_punct(token)
                or token in tokenizer.stop_tokens
                or token in lexicon.hard_stopwords
                or token in lexicon.nado_particles)


def _run_bounds(tokens, lexicon, tokenizer, max_units=MAX_RUN_UNITS) -> list[tuple[int, int]]:
    bounds = []
    start = None
    for i, tok in enumerate([*tokens, None]):
        content = tok is not None and _is_content(tok, lexicon, tokenizer)
        if content and start is None:
            start = i
        elif not content and start is not None:
            for s in range(start, i, max_units):
                bounds.append((s, min(s + max_units, i)))
            start = None
    return bounds


def content_runs(tokens, lexicon: Lexicon, tokenizer: Tokenizer,
                 max_units: int = MAX_RUN_UNITS) -> list[list[str]]:
    return [list(tokens[s:e]) for s, e in _run_bounds(tokens, lexicon, tokenizer, max_units)]


@dataclass(frozen=True)
class ExtractedTerm:
    surface: str
    units: tuple[str, ...]
    source: str
    extraction_weight: float
    attributes: frozenset[str]
    tf_q: int

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def key(self) -> tuple[str, str, bool]:
        return (self.source, self.surface, "neg" in self.attributes)


@dataclass(frozen=True)
class PhraseLattice:
    units: tuple[str, ...]
    # (start, end, surface) for every contiguous span, ordered by (start, end)
    edges: tuple[tuple[int, int, str], ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.units)

    @property
    def path_count(self) -> int:
        return 2 ** (len(self.units) - 1)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(s, e): k for k, (s, e, _) in enumerate(self.edges)}

    def paths(self) -> Iterator[tuple[tuple[int, int], ...]]:
        """Every start-to-end segmentation, as a tuple of (start, end) edges."""
        n = len(self.units)
        for k in range(n):
            for cuts in combinations(range(1, n), k):
                points = (0, *cuts, n)
                yield tuple(zip(points, points[1:]))


def build_lattice(run, joiner: str = " ") -> PhraseLattice:
    units = tuple(run)
    if not units:
        raise ValueError("cannot build a lattice over an empty run")
    n = len(units)
    edges = tuple((i, j, joiner.join(units[i:j])) for i in range(n) for j in range(i + 1, n + 1))
    return PhraseLattice(units, edges)


@dataclass(frozen=True)
class _Span:
    source: str
    units: tuple[str, ...]
    surface: str
    run_length: int
    attributes: frozenset[str]


def _field_spans(topic: Topic, tokenizer: Tokenizer, lexicon: Lexicon, longest: bool):
    """Per source field, the runs as lists of _Span (all spans, or unit spans only).

    Hard stopwords break runs but still come out as isolated one-unit runs
    so their stopword weight can be applied.
    """
    joiner = tokenizer.joiner
    for source, tokens in ((DESCRIPTION, topic.description), (NARRATIVE, topic.narrative)):
        bounds = _run_bounds(tokens, lexicon, tokenizer)
        bounds += [(i, i + 1) for i, tok in enumerate(tokens)
                   if tok in lexicon.hard_stopwords and not tokenizer.is_punct(tok)]
        bounds.sort()
        for start, end in bounds:
            n = end - start
            spans = []
            for i in range(start, end):
                for j in range(i + 1, end + 1 if longest else i + 2):
                    units = tuple(tokens[i:j])
                    surface = joiner.join(units)
                    following = tokens[j] if j < len(tokens) else None
                    flags = _span_attributes(units, surface, following, lexicon)
                    if source == NARRATIVE and topic.in_neg(i, j):
                        flags |= {"neg"}
                    spans.append(_Span(source, units, surface, n, flags))
            yield source, spans


def _merge(spans, weight_of) -> list[ExtractedTerm]:
    merged: dict[tuple, ExtractedTerm] = {}
    for sp in spans:
        key = (sp.source, sp.surface, "neg" in sp.attributes)
        w = weight_of(sp)
        prev = merged.get(key)
        if prev is None:
            merged[key] = ExtractedTerm(sp.surface, sp.units, sp.source, w, sp.attributes, 1)
        else:
            merged[key] = ExtractedTerm(sp.surface, sp.units, sp.source,
                                        max(prev.extraction_weight, w),
                                        prev.attributes | sp.attributes, prev.tf_q + 1)
    return sorted(merged.values(), key=lambda t: t.key)


def extract_shortest(topic: Topic, tokenizer: Tokenizer, lexicon: Lexicon) -> list[ExtractedTerm]:
    spans = [sp for _, run in _field_spans(topic, tokenizer, lexicon, False) for sp in run]
    return _merge(spans, lambda sp: 1.0)


def _all_pattern_weight(sp: _Span) -> float:
    return 1.0 / math.sqrt(sp.run_length * (sp.run_length + 1) / 2)


def extract_all_patterns(topic: Topic, tokenizer: Tokenizer, lexicon: Lexicon) -> list[ExtractedTerm]:
    spans = [sp for _, run in _field_spans(topic, tokenizer, lexicon, True) for sp in run]
    return _merge(spans, _all_pattern_weight)


def extract_downweight(topic: Topic, tokenizer: Tokenizer, lexicon: Lexicon,
                       k_down: float) -> list[ExtractedTerm]:
    if not 0.0 <= k_down <= 1.0:
        raise ConfigError(f"k_down must lie in [0, 1], got {k_down}")
    spans = [sp for _, run in _field_spans(topic, tokenizer, lexicon, True) for sp in run]
    # x=1 always gets exactly 1, including k_down=0
    return _merge(spans, lambda sp: 1.0 if len(sp.units) == 1 else k_down ** (len(sp.units) - 1))


def extract_lattice_terms(topic: Topic, tokenizer: Tokenizer, lexicon: Lexicon
                          ) -> list[tuple[PhraseLattice, list[ExtractedTerm]]]:
    """One lattice per distinct run, with an ExtractedTerm per edge.

    Identical runs (same field, same spans, same flags) share one lattice,
    so a one-unit run repeated k times behaves like a shortest term with
    tf_q = k.
    """
    runs = list(_field_spans(topic, tokenizer, lexicon, True))
    counts = Counter((sp.source, sp.surface, "neg" in sp.attributes)
                     for _, run in runs for sp in run)
    out = []
    seen = set()
    for _source, run in runs:
        signature = tuple((sp.source, sp.surface, sp.attributes) for sp in run)
        if signature in seen:
            continue
        seen.add(signature)
        n = run[0].run_length
        units = tuple(sp.units[0] for sp in run if len(sp.units) == 1)
        lattice = build_lattice(units, tokenizer.joiner)
        by_span = {}
        k = 0
        for i in range(n):
            for j in range(i + 1, n + 1):
                by_span[(i, j)] = run[k]
                k += 1
        edge_terms = []
        for i, j, surface in lattice.edges:
            sp = by_span[(i, j)]
            edge_terms.append(ExtractedTerm(
                sp.surface, sp.units, sp.source, 1.0, sp.attributes,
                counts[(sp.source, sp.surface, "neg" in sp.attributes)]))
        out.append((lattice, edge_terms))
    return out
