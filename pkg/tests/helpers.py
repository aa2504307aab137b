"""Random corpora and brute-force reference implementations.

Nothing here touches the index or the scorer: the oracles read raw token
lists and spell every formula out again.
"""

from __future__ import annotations

import math
import random
from itertools import product

from loccat.analysis import Lexicon, Tokenizer
from loccat.config import ScoringConfig
from loccat.corpus import Document, JudgmentSet, Topic

WORDS = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "tokyo", "1995", "もの", "the", "such"]
CATEGORIES = ["econ", "pol", "sport", ""]

LEXICON = Lexicon(
    proper_nouns=frozenset({"tokyo"}),
    hard_stopwords=frozenset({"the"}),
    soft_stopwords=frozenset({"w7"}),
    nado_particles=frozenset({"such"}),
)
TOKENIZER = Tokenizer()


def random_corpus(rng: random.Random, max_docs: int = 50, max_tokens: int = 30) -> list[Document]:
    docs = []
    for i in range(rng.randint(1, max_docs)):
        n = rng.randint(0, max_tokens)
        h = rng.randint(0, min(5, n))
        tokens = [rng.choice(WORDS + ["."]) for _ in range(n)]
        docs.append(Document(f"d{i:03d}", rng.choice(CATEGORIES), tuple(tokens[:h]), tuple(tokens[h:])))
    return docs


def random_topic(rng: random.Random, topic_id: str = "t1", max_terms: int = 20) -> Topic:
    n_desc = rng.randint(0, 5)
    n_narr = rng.randint(0, max_terms - n_desc)
    desc = tuple(rng.choice(WORDS) for _ in range(n_desc))
    narr = tuple(rng.choice(WORDS + ["."]) for _ in range(n_narr))
    neg = ()
    if narr and rng.random() < 0.5:
        s = rng.randrange(len(narr))
        neg = ((s, rng.randint(s + 1, len(narr))),)
    return Topic(topic_id, desc, narr, neg)


def random_config(rng: random.Random, method: str | None = None) -> ScoringConfig:
    r = lambda lo, hi: round(rng.uniform(lo, hi), 3)  # noqa: E731
    return ScoringConfig(
        k_t=r(0, 2), k_q=r(0, 1), k_location_1=r(0.5, 2), k_location_2=r(0, 0.5),
        k_category=r(0, 0.5), k_descr=r(1, 2), k_proper=r(1, 3), k_nado=r(1, 2),
        k_num=r(0, 1), k_hira=r(0, 1), k_neg=r(0, 1), k_stopword_1=r(0, 1),
        k_stopword_2=r(0, 1), k_down=r(0, 1), use_length_term=rng.random() < 0.5,
        feedback_depth=rng.randint(1, 20),
        extraction_method=method or rng.choice(["shortest", "all_patterns", "lattice", "downweight"]),
        results_per_topic=300,
    )


# -- scoring oracle ------------------------------------------------------------

def _starts(seq, units):
    k = len(units)
    return [i for i in range(len(seq) - k + 1) if tuple(seq[i:i + k]) == tuple(units)]


class BruteForce:
    """Extended score evaluated from raw documents by direct scanning."""

    def __init__(self, docs: list[Document], cfg: ScoringConfig):
        self.docs = docs
        self.cfg = cfg
        self.n = len(docs)
        self.avg = sum(len(d.headline) + len(d.body) for d in docs) / self.n
        self._df = {}

    def df(self, units):
        if units not in self._df:
            self._df[units] = sum(1 for d in self.docs
                                  if _starts(d.headline, units) or _starts(d.body, units))
        return self._df[units]

    def detail(self, term):
        c = self.cfg
        a = term.attributes
        value = 1.0
        value *= c.k_descr if term.source == "description" else 1.0
        value *= c.k_proper if "proper" in a else 1.0
        value *= c.k_nado if "nado" in a else 1.0
        value *= c.k_num if "numeric" in a else 1.0
        value *= c.k_hira if "hiragana_only" in a else 1.0
        value *= c.k_neg if "neg" in a else 1.0
        value *= c.k_stopword_1 if "hard_stopword" in a else 1.0
        value *= c.k_stopword_2 if "soft_stopword" in a else 1.0
        return value

    def term_value(self, doc: Document, term) -> float:
        c = self.cfg
        title = _starts(doc.headline, term.units)
        body = _starts(doc.body, term.units)
        tf = len(title) + len(body)
        if tf == 0:
            return 0.0
        length = len(doc.headline) + len(doc.body)
        tf_part = tf / (tf + c.k_t * length / self.avg)
        idf = math.log(self.n / self.df(term.units))
        tfq = term.tf_q / (term.tf_q + c.k_q)
        if title:
            loc = c.k_location_1
        else:
            loc = 1 + c.k_location_2 * (length - 2 * body[0]) / length
        return tf_part * idf * tfq * self.detail(term) * loc * term.extraction_weight

    def lattice_value(self, doc: Document, lattice, edge_terms) -> float:
        n = len(lattice.units)
        by_span = {(s, e): t for (s, e, _), t in zip(lattice.edges, edge_terms)}
        best = -math.inf
        for mask in product((False, True), repeat=n - 1):
            cuts = [0] + [i + 1 for i, cut in enumerate(mask) if cut] + [n]
            value = sum(self.term_value(doc, by_span[(a, b)]) for a, b in zip(cuts, cuts[1:]))
            best = max(best, value)
        return best

    def inner(self, doc: Document, terms) -> float:
        if self.cfg.extraction_method == "lattice":
            total = sum(self.lattice_value(doc, lat, ts) for lat, ts in terms)
        else:
            total = sum(self.term_value(doc, t) for t in terms)
        if self.cfg.use_length_term:
            length = len(doc.headline) + len(doc.body)
            total += length / (length + self.avg)
        return total

    def scores(self, terms) -> dict[str, float]:
        inner = {d.doc_id: self.inner(d, terms) for d in self.docs}
        if self.cfg.k_category == 0:
            return inner
        first = sorted(self.docs, key=lambda d: (-inner[d.doc_id], d.doc_id))
        top = first[:self.cfg.feedback_depth]
        scores = {}
        for d in self.docs:
            a = sum(1 for t in top if t.category == d.category) / len(top)
            b = sum(1 for t in self.docs if t.category == d.category) / self.n
            factor = 1 + self.cfg.k_category * (a - b) / (a + b)
            scores[d.doc_id] = factor * inner[d.doc_id]
        return scores


def ranking(scores: dict[str, float]) -> list[str]:
    return sorted(scores, key=lambda d: (-scores[d], d))


# -- metric oracles --------------------------------------------------------------

def brute_r_precision(run: list[str], relevant: set[str]) -> float:
    r = len(relevant)
    padded = list(run) + [None] * r
    return len([d for d in padded[:r] if d in relevant]) / r


def brute_average_precision(run: list[str], relevant: set[str]) -> float:
    precisions = []
    for k in range(1, len(run) + 1):
        if run[k - 1] in relevant:
            precisions.append(len(set(run[:k]) & relevant) / k)
    return sum(precisions) / len(relevant)


# -- synthetic test collection ---------------------------------------------------

FILLER = [f"f{i}" for i in range(40)]
TOPIC_WORDS = {
    "q1": (["merger", "bank"], ["acquisition", "shares"]),
    "q2": (["election", "vote"], ["campaign", "party"]),
    "q3": (["drought", "rice"], ["harvest", "farmers"]),
    "q4": (["stadium", "final"], ["coach", "league"]),
    "q5": (["tariff", "export"], ["trade", "ministry"]),
    "q6": (["earthquake", "kobe"], ["rescue", "damage"]),
}
TOPIC_CATEGORY = {"q1": "econ", "q2": "pol", "q3": "econ", "q4": "sport", "q5": "econ", "q6": "society"}


def synthetic_collection(seed: int = 7, n_docs: int = 200):
    """Collection where relevance correlates with category and term placement.

    Each topic has a handful of relevant documents in its home category
    that mention the topic words early or in the headline, plus distractors
    in other categories that mention the same words late in the body, often
    with extra repetitions.  B-judgments add the partly relevant distractors
    that share the home category.
    """
    rng = random.Random(seed)
    docs = []
    rel_a: dict[str, set[str]] = {t: set() for t in TOPIC_WORDS}
    rel_b: dict[str, set[str]] = {t: set() for t in TOPIC_WORDS}
    cats = sorted(set(TOPIC_CATEGORY.values()))
    topic_ids = sorted(TOPIC_WORDS)

    def body_with(words, early: bool, length: int):
        body = [rng.choice(FILLER) for _ in range(length)]
        for w in words:
            pos = rng.randrange(0, max(1, length // 4)) if early else rng.randrange(length // 2, length)
            body.insert(pos, w)
        return body

    i = 0
    while len(docs) < n_docs:
        topic = topic_ids[i % len(topic_ids)]
        desc, narr = TOPIC_WORDS[topic]
        kind = rng.random()
        doc_id = f"doc{len(docs):04d}"
        length = rng.randint(20, 60)
        if kind < 0.12:
            # relevant: home category, topic words up front and in the headline
            cat = TOPIC_CATEGORY[topic]
            words = desc + rng.sample(narr, 1)
            headline = [rng.choice(desc), rng.choice(FILLER)]
            body = body_with(words, True, length)
            rel_a[topic].add(doc_id)
            rel_b[topic].add(doc_id)
        elif kind < 0.40:
            # distractor: other category, topic words late and repeated
            cat = rng.choice([c for c in cats if c != TOPIC_CATEGORY[topic]])
            words = desc + desc + narr
            headline = [rng.choice(FILLER) for _ in range(2)]
            body = body_with(words, False, length)
        elif kind < 0.50:
            # partly relevant: home category, words late
            cat = TOPIC_CATEGORY[topic]
            headline = [rng.choice(FILLER) for _ in range(2)]
            body = body_with(desc, False, length)
            rel_b[topic].add(doc_id)
        else:
            cat = rng.choice(cats)
            headline = [rng.choice(FILLER) for _ in range(2)]
            body = [rng.choice(FILLER) for _ in range(length)]
        docs.append(Document(doc_id, cat, tuple(headline), tuple(body)))
        i += 1

    topics = []
    for t in topic_ids:
        desc, narr = TOPIC_WORDS[t]
        narrative = tuple(["documents", "about"] + narr + ["."] + ["not", "about", "weather", "."])
        neg_start = narrative.index(".") + 1
        topics.append(Topic(t, tuple(desc), narrative, ((neg_start, len(narrative)),)))
    qa = JudgmentSet("A", {(t, d): True for t, ds in rel_a.items() for d in ds})
    qb = JudgmentSet("B", {(t, d): True for t, ds in rel_b.items() for d in ds})
    return docs, topics, qa, qb


SYNTHETIC_LEXICON = Lexicon(hard_stopwords=frozenset({"about", "not"}),
                            soft_stopwords=frozenset({"documents"}))


def format_qrels(judgments: JudgmentSet, all_docs: list[str] | None = None) -> str:
    lines = [f"{t} 0 {d} 1" for (t, d) in sorted(judgments.entries)]
    return "\n".join(lines) + "\n"
