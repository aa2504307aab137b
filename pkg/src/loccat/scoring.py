"""BM11 scoring extended with location, category-feedback and detail factors.

A document's score is::

    K_category(d) * ( sum_t TF * IDF * TF_q * K_detail * K_location * w_t
                      + length(d) / (length(d) + avg_length) )

where ``w_t`` is the extraction weight of the query term and the length
term is optional.  ``retrieve`` runs the two-pass category feedback:
the first pass fixes K_category at 1, the category mix of its top documents
then sets K_category for the second pass.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Union

from loccat.analysis import (
    DESCRIPTION,
    ExtractedTerm,
    Lexicon,
    PhraseLattice,
    Tokenizer,
    extract_all_patterns,
    extract_downweight,
    extract_lattice_terms,
    extract_shortest,
)
from loccat.config import ScoringConfig
from loccat.corpus import Document, Topic
from loccat.index import InvertedIndex, Posting, lookup, lookup_phrase

Lattices = list[tuple[PhraseLattice, list[ExtractedTerm]]]
Terms = Union[list[ExtractedTerm], Lattices]


class StatsError(ValueError):
    pass


class DomainError(ValueError):
    pass


class EmptyIndexError(ValueError):
    pass


def tf_part(tf: int, length: int, cfg: ScoringConfig, avg_length: float) -> float:
    if avg_length <= 0:
        raise StatsError(f"average document length must be > 0, got {avg_length}")
    if tf == 0:
        return 0.0
    return tf / (tf + cfg.k_t * length / avg_length)


def idf_part(df: int, n_docs: int) -> float:
    if not 1 <= df <= n_docs:
        raise DomainError(f"df must lie in [1, N={n_docs}], got {df}")
    return math.log(n_docs / df)


def tfq_part(tf_q: int, cfg: ScoringConfig) -> float:
    return tf_q / (tf_q + cfg.k_q)


def k_location(posting: Posting, length: int, cfg: ScoringConfig) -> float:
    if posting.in_title:
        return cfg.k_location_1
    if posting.first_body_pos is None:
        raise AssertionError("posting has neither a title nor a body occurrence")
    return 1 + cfg.k_location_2 * (length - 2 * posting.first_body_pos) / length


_DETAIL_FLAGS = (
    ("proper", "k_proper"),
    ("nado", "k_nado"),
    ("numeric", "k_num"),
    ("hiragana_only", "k_hira"),
    ("neg", "k_neg"),
    ("hard_stopword", "k_stopword_1"),
    ("soft_stopword", "k_stopword_2"),
)


def k_detail(term: ExtractedTerm, cfg: ScoringConfig) -> float:
    value = cfg.k_descr if term.source == DESCRIPTION else 1.0
    for flag, constant in _DETAIL_FLAGS:
        if flag in term.attributes:
            value *= getattr(cfg, constant)
    return value


def k_category_factor(doc_category: str, ratio_a: float, ratio_b: float,
                      cfg: ScoringConfig) -> float:
    if ratio_a + ratio_b == 0:
        return 1.0
    return 1 + cfg.k_category * (ratio_a - ratio_b) / (ratio_a + ratio_b)


def length_term(length: int, avg_length: float) -> float:
    if length + avg_length == 0:
        return 0.0
    return length / (length + avg_length)


@dataclass(frozen=True)
class TermScore:
    surface: str
    source: str
    tf: int
    df: int
    tf_part: float
    idf_part: float
    tfq_part: float
    k_detail: float
    k_location: float
    extraction_weight: float
    contribution: float
    neg: bool = False


@dataclass
class ScoreBreakdown:
    doc_id: str
    terms: list[TermScore]
    k_category: float
    length_term: float
    total: float


@dataclass
class RankedRun:
    topic_id: str
    entries: list[tuple[str, float]] = field(default_factory=list)

    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]


def extract_terms(topic: Topic, cfg: ScoringConfig, tokenizer: Tokenizer,
                  lexicon: Lexicon) -> Terms:
    method = cfg.extraction_method
    if method == "shortest":
        return extract_shortest(topic, tokenizer, lexicon)
    if method == "all_patterns":
        return extract_all_patterns(topic, tokenizer, lexicon)
    if method == "downweight":
        return extract_downweight(topic, tokenizer, lexicon, cfg.k_down)
    return extract_lattice_terms(topic, tokenizer, lexicon)


class _PreparedTerm:
    __slots__ = ("term", "df", "postings", "idf", "tfq", "detail")

    def __init__(self, term: ExtractedTerm, index: InvertedIndex, cfg: ScoringConfig,
                 cache: dict):
        self.term = term
        if term.units not in cache:
            df, postings = lookup_phrase(term.units, index)
            cache[term.units] = (df, {p.doc_ordinal: p for p in postings})
        self.df, self.postings = cache[term.units]
        self.idf = idf_part(self.df, index.stats.n_docs) if self.df else 0.0
        self.tfq = tfq_part(term.tf_q, cfg)
        self.detail = k_detail(term, cfg)


class Scorer:
    """Per-(topic terms, index, config) scoring state.

    Raw sums are always accumulated in the same term order, so a breakdown
    reproduces a ranked score bit for bit.
    """

    def __init__(self, terms: Terms, index: InvertedIndex, cfg: ScoringConfig,
                 lattice: bool | None = None):
        self.index = index
        self.cfg = cfg
        stats = index.stats
        if stats.n_docs == 0:
            raise EmptyIndexError("cannot score against an empty index")
        self.lattice = (cfg.extraction_method == "lattice") if lattice is None else lattice
        cache: dict = {}
        if self.lattice:
            self.lattices = sorted(
                ((lat, [_PreparedTerm(t, index, cfg, cache) for t in terms_])
                 for lat, terms_ in terms),
                key=lambda item: [p.term.key for p in item[1]])
            prepared = [p for _, ps in self.lattices for p in ps]
        else:
            self.terms = [_PreparedTerm(t, index, cfg, cache)
                          for t in sorted(terms, key=lambda t: t.key)]
            prepared = self.terms
        self.candidates = sorted({o for p in prepared for o in p.postings})

    def _term_score(self, p: _PreparedTerm, ordinal: int) -> TermScore | None:
        posting = p.postings.get(ordinal)
        if posting is None or p.df == 0:
            return None
        length = self.index.stats.doc_lengths[ordinal]
        tf = tf_part(posting.tf, length, self.cfg, self.index.stats.avg_length)
        loc = k_location(posting, length, self.cfg)
        contribution = tf * p.idf * p.tfq * p.detail * loc * p.term.extraction_weight
        return TermScore(p.term.surface, p.term.source, posting.tf, p.df, tf, p.idf, p.tfq,
                         p.detail, loc, p.term.extraction_weight, contribution,
                         "neg" in p.term.attributes)

    def _lattice_choice(self, lattice: PhraseLattice, prepared: list[_PreparedTerm],
                        ordinal: int):
        scores = [self._term_score(p, ordinal) for p in prepared]
        values = {(s, e): (sc.contribution if sc else 0.0)
                  for (s, e, _), sc in zip(lattice.edges, scores)}
        value, path = best_path(lattice, values)
        index_of = lattice.edge_index()
        chosen = [scores[index_of[edge]] for edge in path]
        return value, [sc for sc in chosen if sc is not None]

    def raw_sum(self, ordinal: int) -> float:
        total = 0.0
        if self.lattice:
            for lattice, prepared in self.lattices:
                total += self._lattice_choice(lattice, prepared, ordinal)[0]
        else:
            for p in self.terms:
                sc = self._term_score(p, ordinal)
                if sc is not None:
                    total += sc.contribution
        return total

    def inner(self, ordinal: int, raw: float) -> float:
        if self.cfg.use_length_term:
            stats = self.index.stats
            return raw + length_term(stats.doc_lengths[ordinal], stats.avg_length)
        return raw

    def breakdown(self, ordinal: int, k_cat: float) -> ScoreBreakdown:
        records: list[TermScore] = []
        raw = 0.0
        if self.lattice:
            for lattice, prepared in self.lattices:
                value, chosen = self._lattice_choice(lattice, prepared, ordinal)
                raw += value
                records.extend(chosen)
        else:
            for p in self.terms:
                sc = self._term_score(p, ordinal)
                if sc is not None:
                    raw += sc.contribution
                    records.append(sc)
        stats = self.index.stats
        lt = length_term(stats.doc_lengths[ordinal], stats.avg_length) if self.cfg.use_length_term else 0.0
        return ScoreBreakdown(self.index.doc_ids[ordinal], records, k_cat, lt,
                              k_cat * self.inner(ordinal, raw))

    def inner_scores(self) -> list[float]:
        """Braced part of the score for every document, by ordinal."""
        raw = [0.0] * self.index.stats.n_docs
        for ordinal in self.candidates:
            raw[ordinal] = self.raw_sum(ordinal)
        return [self.inner(o, r) for o, r in enumerate(raw)]


def best_path(lattice: PhraseLattice, values: dict[tuple[int, int], float]):
    """Highest-scoring segmentation of ``lattice`` given per-edge values.

    Ties prefer fewer edges, then the lexicographically smallest cut points.
    Returns (value, path) with path a tuple of (start, end) edges.
    """
    n = lattice.size
    # best[i]: (value, edge count, cut points, path) for the suffix starting at i
    best: list = [None] * (n + 1)
    best[n] = (0.0, 0, (), ())
    for i in range(n - 1, -1, -1):
        winner = None
        for j in range(i + 1, n + 1):
            value, count, cuts, path = best[j]
            cand = (values[(i, j)] + value, count + 1,
                    ((j,) if j < n else ()) + cuts, ((i, j),) + path)
            if winner is None or (-cand[0], cand[1], cand[2]) < (-winner[0], winner[1], winner[2]):
                winner = cand
        best[i] = winner
    return best[0][0], best[0][3]


def _ordinal_of(doc: Document | str, index: InvertedIndex) -> int:
    return index.ordinal(doc.doc_id if isinstance(doc, Document) else doc)


def score_document(doc: Document | str, terms: list[ExtractedTerm], index: InvertedIndex,
                   cfg: ScoringConfig, k_cat: float = 1.0) -> ScoreBreakdown:
    return Scorer(terms, index, cfg, lattice=False).breakdown(_ordinal_of(doc, index), k_cat)


def score_lattice(doc: Document | str, lattices: Lattices, index: InvertedIndex,
                  cfg: ScoringConfig, k_cat: float = 1.0) -> ScoreBreakdown:
    return Scorer(lattices, index, cfg, lattice=True).breakdown(_ordinal_of(doc, index), k_cat)


def _rank(scores: list[float], doc_ids: list[str]) -> list[int]:
    return sorted(range(len(scores)), key=lambda o: (-scores[o], doc_ids[o]))


def feedback_ratios(ranking: list[int], index: InvertedIndex, depth: int) -> dict[str, float]:
    """Category mix of the top ``depth`` documents of a first-pass ranking."""
    top = ranking[:depth]
    counts = Counter(index.stats.category_of[o] for o in top)
    return {c: n / len(top) for c, n in counts.items()}


def _two_pass(topic: Topic, index: InvertedIndex, cfg: ScoringConfig,
              lexicon: Lexicon | None, tokenizer: Tokenizer | None):
    if index.stats.n_docs == 0:
        raise EmptyIndexError("cannot retrieve from an empty index")
    terms = extract_terms(topic, cfg, tokenizer or index.tokenizer, lexicon or index.lexicon)
    scorer = Scorer(terms, index, cfg)
    inner = scorer.inner_scores()
    k_cat = [1.0] * len(inner)
    scores = [1.0 * s for s in inner]
    if cfg.k_category != 0:
        first = _rank(scores, index.doc_ids)
        ratio_a = feedback_ratios(first, index, cfg.feedback_depth)
        ratio_b = index.stats.category_global_ratio
        cats = index.stats.category_of
        k_cat = [k_category_factor(cats[o], ratio_a.get(cats[o], 0.0), ratio_b[cats[o]], cfg)
                 for o in range(len(inner))]
        scores = [k * s for k, s in zip(k_cat, inner)]
    return scorer, k_cat, scores


def retrieve(topic: Topic, index: InvertedIndex, cfg: ScoringConfig,
             lexicon: Lexicon | None = None, tokenizer: Tokenizer | None = None,
             with_breakdowns: bool = True) -> tuple[RankedRun, dict[str, ScoreBreakdown]]:
    scorer, k_cat, scores = _two_pass(topic, index, cfg, lexicon, tokenizer)
    ranking = _rank(scores, index.doc_ids)[:cfg.results_per_topic]
    run = RankedRun(topic.topic_id, [(index.doc_ids[o], scores[o]) for o in ranking])
    breakdowns = {}
    if with_breakdowns:
        breakdowns = {index.doc_ids[o]: scorer.breakdown(o, k_cat[o]) for o in ranking}
    return run, breakdowns


def explain(topic: Topic, doc_id: str, index: InvertedIndex, cfg: ScoringConfig,
            lexicon: Lexicon | None = None, tokenizer: Tokenizer | None = None) -> ScoreBreakdown:
    """Final-pass breakdown of one document, whether or not it makes the cutoff."""
    if doc_id not in index:
        raise KeyError(doc_id)
    scorer, k_cat, _ = _two_pass(topic, index, cfg, lexicon, tokenizer)
    ordinal = index.ordinal(doc_id)
    return scorer.breakdown(ordinal, k_cat[ordinal])


def retrieve_baseline(topic: Topic, index: InvertedIndex, cfg: ScoringConfig,
                      lexicon: Lexicon | None = None,
                      tokenizer: Tokenizer | None = None) -> RankedRun:
    """Plain BM11 over shortest terms: no extended factors, no feedback."""
    if index.stats.n_docs == 0:
        raise EmptyIndexError("cannot retrieve from an empty index")
    stats = index.stats
    terms = extract_shortest(topic, tokenizer or index.tokenizer, lexicon or index.lexicon)
    scores = [0.0] * stats.n_docs
    for term in sorted(terms, key=lambda t: t.key):
        found = lookup(term.surface, index)
        if found is None:
            continue
        df, postings = found
        idf = math.log(stats.n_docs / df)
        tfq = term.tf_q / (term.tf_q + cfg.k_q)
        for p in postings:
            length = stats.doc_lengths[p.doc_ordinal]
            tf = p.tf / (p.tf + cfg.k_t * length / stats.avg_length)
            scores[p.doc_ordinal] += tf * idf * tfq
    ranking = _rank(scores, index.doc_ids)[:cfg.results_per_topic]
    return RankedRun(topic.topic_id, [(index.doc_ids[o], scores[o]) for o in ranking])
