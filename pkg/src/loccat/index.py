"""Positional inverted index and its on-disk format.

File layout (little-endian)::

    header      magic b"P2IX", u16 version, u64 N, f64 avg_length, u8 flags
    doc table   per doc: str doc_id, varint length, varint category id
    categories  varint count, str per category (sorted by UTF-8 bytes)
    analysis    tokenizer settings and the lexicon, so queries are analysed
                the same way the collection was
    vocabulary  varint count, then per surface (sorted by UTF-8 bytes):
                str surface, varint df, postings with delta-coded ordinals
                and delta-coded title/body positions
    checksum    u64, first 8 bytes of BLAKE2b over everything before it

``str`` is a varint byte length followed by UTF-8 bytes.
"""

from __future__ import annotations

import hashlib
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from loccat.analysis import Lexicon, Tokenizer
from loccat.corpus import Document, DuplicateIdError

MAGIC = b"P2IX"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHQdB")
_CHECKSUM = struct.Struct("<Q")
_FLAG_POSITIONAL = 1


class IndexFormatError(ValueError):
    pass


class CapabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class Posting:
    doc_ordinal: int
    tf: int
    first_body_pos: int | None
    in_title: bool
    title_positions: tuple[int, ...] = ()
    body_positions: tuple[int, ...] = ()


@dataclass
class IndexStats:
    n_docs: int
    avg_length: float
    doc_lengths: list[int]
    category_of: list[str]
    category_global_ratio: dict[str, float]


@dataclass
class InvertedIndex:
    vocabulary: dict[str, list[Posting]]
    stats: IndexStats
    doc_ids: list[str]
    positional: bool = True
    tokenizer: Tokenizer = field(default_factory=Tokenizer)
    lexicon: Lexicon = field(default_factory=Lexicon)

    def __post_init__(self):
        self._ordinal = {d: i for i, d in enumerate(self.doc_ids)}

    def ordinal(self, doc_id: str) -> int:
        return self._ordinal[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._ordinal

    def df(self, surface: str) -> int:
        return len(self.vocabulary.get(surface, ()))


def _category_ratios(categories: list[str]) -> dict[str, float]:
    counts = Counter(categories)
    n = len(categories)
    return {c: counts[c] / n for c in sorted(counts, key=lambda c: c.encode())}


def build_index(docs: list[Document], tokenizer: Tokenizer | None = None,
                lexicon: Lexicon | None = None, positional: bool = True) -> InvertedIndex:
    """Index every headline and body token of ``docs`` (ordinals follow input order)."""
    doc_ids = [d.doc_id for d in docs]
    if len(set(doc_ids)) != len(doc_ids):
        dup = next(d for d, c in Counter(doc_ids).items() if c > 1)
        raise DuplicateIdError(f"duplicate doc_id {dup!r}")
    where: dict[str, dict[int, tuple[list[int], list[int]]]] = {}
    for ordinal, doc in enumerate(docs):
        for part, tokens in ((0, doc.headline), (1, doc.body)):
            for pos, tok in enumerate(tokens):
                slot = where.setdefault(tok, {}).setdefault(ordinal, ([], []))
                slot[part].append(pos)
    vocabulary = {}
    for surface in sorted(where, key=lambda s: s.encode()):
        plist = []
        for ordinal, (title, body) in sorted(where[surface].items()):
            plist.append(Posting(
                ordinal, len(title) + len(body), body[0] if body else None, bool(title),
                tuple(title) if positional else (), tuple(body) if positional else ()))
        vocabulary[surface] = plist
    lengths = [d.raw_length for d in docs]
    categories = [d.category for d in docs]
    stats = IndexStats(
        n_docs=len(docs),
        avg_length=sum(lengths) / len(docs) if docs else 0.0,
        doc_lengths=lengths,
        category_of=categories,
        category_global_ratio=_category_ratios(categories) if docs else {},
    )
    return InvertedIndex(vocabulary, stats, doc_ids, positional,
                         tokenizer or Tokenizer(), lexicon or Lexicon())


def lookup(surface: str, index: InvertedIndex) -> tuple[int, list[Posting]] | None:
    postings = index.vocabulary.get(surface)
    if postings is None:
        return None
    return len(postings), postings


def _adjacent_starts(position_lists: list[tuple[int, ...]]) -> list[int]:
    starts = set(position_lists[0])
    for offset, positions in enumerate(position_lists[1:], 1):
        starts &= {p - offset for p in positions}
    return sorted(starts)


def lookup_phrase(units, index: InvertedIndex) -> tuple[int, list[Posting]]:
    """Synthetic (df, postings) for consecutive occurrences of ``units``."""
    units = tuple(units)
    if not units:
        raise ValueError("phrase needs at least one unit")
    if len(units) == 1:
        found = lookup(units[0], index)
        return found if found is not None else (0, [])
    if not index.positional:
        raise CapabilityError("multi-unit lookup needs a positional index")
    lists = [index.vocabulary.get(u) for u in units]
    if any(pl is None for pl in lists):
        return 0, []
    by_doc = [{p.doc_ordinal: p for p in pl} for pl in lists]
    common = set(by_doc[0])
    for table in by_doc[1:]:
        common &= table.keys()
    out = []
    for ordinal in sorted(common):
        ps = [table[ordinal] for table in by_doc]
        title = _adjacent_starts([p.title_positions for p in ps])
        body = _adjacent_starts([p.body_positions for p in ps])
        if title or body:
            out.append(Posting(ordinal, len(title) + len(body), body[0] if body else None,
                               bool(title), tuple(title), tuple(body)))
    return len(out), out


def category_ratios_global(index: InvertedIndex) -> dict[str, float]:
    if index.stats.n_docs == 0:
        raise ValueError("category ratios of an empty index are undefined")
    return dict(index.stats.category_global_ratio)


# -- serialization -----------------------------------------------------------

def _varint(value: int, out: bytearray) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _str(text: str, out: bytearray) -> None:
    raw = text.encode("utf-8")
    _varint(len(raw), out)
    out += raw


def _deltas(values, out: bytearray) -> None:
    _varint(len(values), out)
    prev = 0
    for v in values:
        _varint(v - prev, out)
        prev = v


class _Reader:
    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def varint(self) -> int:
        shift = result = 0
        while True:
            if self.pos >= len(self.data):
                raise IndexFormatError("truncated index body")
            byte = self.data[self.pos]
            self.pos += 1
            result |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return result
            shift += 7

    def str(self) -> str:
        n = self.varint()
        raw = self.data[self.pos:self.pos + n]
        if len(raw) != n:
            raise IndexFormatError("truncated index body")
        self.pos += n
        return raw.decode("utf-8")

    def deltas(self) -> tuple[int, ...]:
        out = []
        prev = 0
        for _ in range(self.varint()):
            prev += self.varint()
            out.append(prev)
        return tuple(out)


def _sorted_bytes(items):
    return sorted(items, key=lambda s: s.encode())


def dump_index(index: InvertedIndex) -> bytes:
    stats = index.stats
    out = bytearray(_HEADER.pack(MAGIC, FORMAT_VERSION, stats.n_docs, stats.avg_length,
                                 _FLAG_POSITIONAL if index.positional else 0))
    categories = _sorted_bytes(set(stats.category_of))
    cat_id = {c: i for i, c in enumerate(categories)}
    for doc_id, length, cat in zip(index.doc_ids, stats.doc_lengths, stats.category_of):
        _str(doc_id, out)
        _varint(length, out)
        _varint(cat_id[cat], out)
    _varint(len(categories), out)
    for c in categories:
        _str(c, out)

    tok, lex = index.tokenizer, index.lexicon
    _str(tok.mode, out)
    out.append(1 if tok.lowercase else 0)
    _varint(len(tok.punct_categories), out)
    for c in tok.punct_categories:
        _str(c, out)
    for words in (tok.dictionary, tok.stop_tokens, lex.proper_nouns, lex.hard_stopwords,
                  lex.soft_stopwords, lex.nado_particles):
        words = _sorted_bytes(words)
        _varint(len(words), out)
        for w in words:
            _str(w, out)
    _str(lex.numeric_pattern, out)
    _str(lex.hira_pattern, out)

    surfaces = _sorted_bytes(index.vocabulary)
    _varint(len(surfaces), out)
    for surface in surfaces:
        postings = index.vocabulary[surface]
        _str(surface, out)
        _varint(len(postings), out)
        prev = 0
        for p in postings:
            _varint(p.doc_ordinal - prev, out)
            prev = p.doc_ordinal
            if index.positional:
                _deltas(p.title_positions, out)
                _deltas(p.body_positions, out)
            else:
                _varint(p.tf, out)
                _varint(0 if p.first_body_pos is None else p.first_body_pos + 1, out)
                out.append(1 if p.in_title else 0)
    out += _CHECKSUM.pack(_checksum(bytes(out)))
    return bytes(out)


def _checksum(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def save_index(index: InvertedIndex, path: str | Path) -> None:
    Path(path).write_bytes(dump_index(index))


def parse_index(data: bytes) -> InvertedIndex:
    if len(data) < _HEADER.size + _CHECKSUM.size:
        raise IndexFormatError("truncated index: shorter than header and checksum")
    magic, version, n_docs, avg_length, flags = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise IndexFormatError(f"bad magic bytes {magic!r}, not an index file")
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"index format version {version}, expected {FORMAT_VERSION}")
    body, (stored,) = data[:-_CHECKSUM.size], _CHECKSUM.unpack_from(data, len(data) - _CHECKSUM.size)
    if _checksum(body) != stored:
        raise IndexFormatError("checksum mismatch: index file truncated or corrupted")
    r = _Reader(body, _HEADER.size)
    positional = bool(flags & _FLAG_POSITIONAL)

    doc_rows = [(r.str(), r.varint(), r.varint()) for _ in range(n_docs)]
    categories = [r.str() for _ in range(r.varint())]
    doc_ids = [row[0] for row in doc_rows]
    lengths = [row[1] for row in doc_rows]
    category_of = [categories[row[2]] for row in doc_rows]

    mode = r.str()
    lowercase = bool(body[r.pos])
    r.pos += 1
    punct = tuple(r.str() for _ in range(r.varint()))
    word_sets = [frozenset(r.str() for _ in range(r.varint())) for _ in range(6)]
    numeric_pattern, hira_pattern = r.str(), r.str()
    tokenizer = Tokenizer(mode, word_sets[0], word_sets[1], punct, lowercase)
    lexicon = Lexicon(*word_sets[2:], numeric_pattern=numeric_pattern, hira_pattern=hira_pattern)

    vocabulary = {}
    for _ in range(r.varint()):
        surface = r.str()
        postings = []
        ordinal = 0
        for _ in range(r.varint()):
            ordinal += r.varint()
            if positional:
                title, bodypos = r.deltas(), r.deltas()
                postings.append(Posting(ordinal, len(title) + len(bodypos),
                                        bodypos[0] if bodypos else None, bool(title),
                                        title, bodypos))
            else:
                tf, first = r.varint(), r.varint()
                in_title = bool(body[r.pos])
                r.pos += 1
                postings.append(Posting(ordinal, tf, first - 1 if first else None, in_title))
        vocabulary[surface] = postings
    if r.pos != len(body):
        raise IndexFormatError("trailing bytes after vocabulary")
    stats = IndexStats(n_docs, avg_length, lengths, category_of,
                       _category_ratios(category_of) if n_docs else {})
    return InvertedIndex(vocabulary, stats, doc_ids, positional, tokenizer, lexicon)


def load_index(path: str | Path) -> InvertedIndex:
    return parse_index(Path(path).read_bytes())
