"""Readers for the tagged newspaper collection, topic files and qrels.

The collection and topic formats are a fixed tag grammar, not general
SGML: only the tag names listed in ``_DOC_FIELDS`` / ``_TOPIC_FIELDS`` (plus
``NEG``) are recognised, anything else is ordinary text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from loccat.analysis import Tokenizer


class ParseError(ValueError):
    """Malformed input. ``offset`` is a byte offset, ``line`` a 1-based line."""

    def __init__(self, message: str, *, offset: int | None = None,
                 line: int | None = None, tag: str | None = None):
        where = []
        if offset is not None:
            where.append(f"byte {offset}")
        if line is not None:
            where.append(f"line {line}")
        if tag is not None:
            where.append(f"tag <{tag}>")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.offset = offset
        self.line = line
        self.tag = tag


class DuplicateIdError(ParseError):
    pass


@dataclass(frozen=True)
class Document:
    doc_id: str
    category: str
    headline: tuple[str, ...]
    body: tuple[str, ...]

    @property
    def raw_length(self) -> int:
        return len(self.headline) + len(self.body)


@dataclass(frozen=True)
class Topic:
    topic_id: str
    description: tuple[str, ...]
    narrative: tuple[str, ...]
    # half-open [start, end) token spans of the narrative
    neg_regions: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.topic_id:
            raise ValueError("topic_id must be non-empty")
        prev_end = 0
        for start, end in self.neg_regions:
            if not (prev_end <= start < end <= len(self.narrative)):
                raise ValueError(f"bad NEG span {(start, end)} in topic {self.topic_id}")
            prev_end = end

    def in_neg(self, start: int, end: int) -> bool:
        """True when narrative span [start, end) intersects a NEG region."""
        return any(s < end and start < e for s, e in self.neg_regions)


@dataclass(frozen=True)
class JudgmentSet:
    grade: str
    entries: dict[tuple[str, str], bool] = field(default_factory=dict)

    def relevant(self, topic_id: str) -> set[str]:
        return {d for (t, d), rel in self.entries.items() if t == topic_id and rel}

    def topics(self) -> set[str]:
        return {t for (t, _d) in self.entries}


_DOC_FIELDS = ("DOCNO", "SECTION", "HEADLINE", "TEXT")
_TOPIC_FIELDS = ("TOPIC-ID", "DESCRIPTION", "NARRATIVE")
_KNOWN = {"DOC", "TOPIC", "NEG", *_DOC_FIELDS, *_TOPIC_FIELDS}
_TAG_RE = re.compile(r"<(/?)([A-Z][A-Z-]*)>")


def _decode(data: bytes | str) -> tuple[str, bool]:
    if isinstance(data, str):
        return data, data.isascii()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("invalid UTF-8", offset=exc.start) from None
    return text, len(text) == len(data)


class _Scanner:
    """Walks the known tags of a decoded input, reporting byte offsets."""

    def __init__(self, text: str, ascii_only: bool):
        self.text = text
        self._ascii = ascii_only
        self.tags = [m for m in _TAG_RE.finditer(text) if m.group(2) in _KNOWN]
        self.pos = 0

    def offset(self, char_pos: int) -> int:
        if self._ascii:
            return char_pos
        return len(self.text[:char_pos].encode("utf-8"))

    def error(self, message: str, char_pos: int, tag: str | None = None) -> ParseError:
        return ParseError(message, offset=self.offset(char_pos), tag=tag)

    def peek(self):
        return self.tags[self.pos] if self.pos < len(self.tags) else None

    def next(self):
        m = self.peek()
        self.pos += 1
        return m

    def gap(self, start: int, end: int) -> None:
        """Only whitespace may sit between structural tags."""
        stray = self.text[start:end]
        if stray.strip():
            lead = len(stray) - len(stray.lstrip())
            raise self.error("unexpected text outside an element", start + lead)

    def records(self, name: str):
        """Yield (open_match, children) per top-level <name> record.

        ``children`` is a list of (open_match, close_match, inner_tags).
        """
        cursor = 0
        while (m := self.next()) is not None:
            self.gap(cursor, m.start())
            if m.group(1) or m.group(2) != name:
                raise self.error(f"expected <{name}>", m.start(), m.group(2))
            children = []
            inner_cursor = m.end()
            while True:
                child = self.next()
                if child is None:
                    raise self.error(f"unclosed <{name}>", m.start(), name)
                self.gap(inner_cursor, child.start())
                if child.group(1):
                    if child.group(2) != name:
                        raise self.error("unexpected closing tag", child.start(), child.group(2))
                    cursor = child.end()
                    break
                tag = child.group(2)
                inner = []
                while True:
                    close = self.next()
                    if close is None:
                        raise self.error("unclosed element", child.start(), tag)
                    if close.group(2) == tag and close.group(1):
                        break
                    if close.group(2) == "NEG":
                        inner.append(close)
                        continue
                    if close.group(1):
                        raise self.error("unclosed element", child.start(), tag)
                    raise self.error(f"tag inside <{tag}>", close.start(), close.group(2))
                children.append((child, close, inner))
                inner_cursor = close.end()
            yield m, children
        self.gap(cursor, len(self.text))


def _fields(scanner: _Scanner, record, allowed: tuple[str, ...], neg_ok: str | None):
    opening, children = record
    found = {}
    for child, close, inner in children:
        tag = child.group(2)
        if tag not in allowed:
            raise scanner.error("unexpected element", child.start(), tag)
        if tag in found:
            raise scanner.error("repeated element", child.start(), tag)
        if inner and tag != neg_ok:
            raise scanner.error("NEG only allowed inside NARRATIVE", inner[0].start(), "NEG")
        found[tag] = (child, close, inner)
    return found


def parse_collection(data: bytes | str, tokenizer: Tokenizer) -> list[Document]:
    text, ascii_only = _decode(data)
    scanner = _Scanner(text, ascii_only)
    docs: list[Document] = []
    seen: set[str] = set()
    for record in scanner.records("DOC"):
        opening = record[0]
        found = _fields(scanner, record, _DOC_FIELDS, None)
        for required in ("DOCNO", "TEXT"):
            if required not in found:
                raise scanner.error(f"record missing <{required}>", opening.start(), required)

        def content(tag: str) -> str:
            if tag not in found:
                return ""
            child, close, _ = found[tag]
            return text[child.end():close.start()]

        doc_id = content("DOCNO").strip()
        if not doc_id:
            raise scanner.error("empty DOCNO", found["DOCNO"][0].start(), "DOCNO")
        if doc_id in seen:
            raise DuplicateIdError(f"duplicate DOCNO {doc_id!r}",
                                   offset=scanner.offset(found["DOCNO"][0].start()), tag="DOCNO")
        seen.add(doc_id)
        category = " ".join(content("SECTION").split())
        docs.append(Document(
            doc_id=doc_id,
            category=category,
            headline=tuple(tokenizer.tokenize(content("HEADLINE"))),
            body=tuple(tokenizer.tokenize(content("TEXT"))),
        ))
    return docs


def _narrative(text: str, child, close, inner, tokenizer: Tokenizer, scanner: _Scanner):
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    cursor = child.end()
    open_at = None
    for tag in inner:
        tokens.extend(tokenizer.tokenize(text[cursor:tag.start()]))
        if tag.group(1):
            if open_at is None:
                raise scanner.error("</NEG> without <NEG>", tag.start(), "NEG")
            if len(tokens) > open_at:
                spans.append((open_at, len(tokens)))
            open_at = None
        else:
            if open_at is not None:
                raise scanner.error("nested <NEG>", tag.start(), "NEG")
            open_at = len(tokens)
            open_pos = tag.start()
        cursor = tag.end()
    if open_at is not None:
        raise scanner.error("unclosed <NEG>", open_pos, "NEG")
    tokens.extend(tokenizer.tokenize(text[cursor:close.start()]))
    return tuple(tokens), tuple(spans)


def parse_topics(data: bytes | str, tokenizer: Tokenizer) -> list[Topic]:
    text, ascii_only = _decode(data)
    scanner = _Scanner(text, ascii_only)
    topics: list[Topic] = []
    seen: set[str] = set()
    for record in scanner.records("TOPIC"):
        opening = record[0]
        found = _fields(scanner, record, _TOPIC_FIELDS, "NARRATIVE")
        if "TOPIC-ID" not in found:
            raise scanner.error("topic missing <TOPIC-ID>", opening.start(), "TOPIC-ID")
        child, close, _ = found["TOPIC-ID"]
        topic_id = text[child.end():close.start()].strip()
        if not topic_id:
            raise scanner.error("empty TOPIC-ID", child.start(), "TOPIC-ID")
        if topic_id in seen:
            raise DuplicateIdError(f"duplicate TOPIC-ID {topic_id!r}",
                                   offset=scanner.offset(child.start()), tag="TOPIC-ID")
        seen.add(topic_id)
        description: tuple[str, ...] = ()
        if "DESCRIPTION" in found:
            child, close, _ = found["DESCRIPTION"]
            description = tuple(tokenizer.tokenize(text[child.end():close.start()]))
        narrative: tuple[str, ...] = ()
        spans: tuple[tuple[int, int], ...] = ()
        if "NARRATIVE" in found:
            narrative, spans = _narrative(text, *found["NARRATIVE"], tokenizer, scanner)
        topics.append(Topic(topic_id, description, narrative, spans))
    return topics


def parse_qrels(data: bytes | str, grade: str) -> JudgmentSet:
    """Read TREC qrels lines ``topic_id 0 doc_id rel``; keeps rel=1 pairs."""
    if grade not in ("A", "B"):
        raise ValueError(f"grade must be 'A' or 'B', got {grade!r}")
    text, _ = _decode(data)
    entries: dict[tuple[str, str], bool] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", line=lineno)
        topic_id, _iteration, doc_id, rel = parts
        try:
            rel_value = int(rel)
        except ValueError:
            raise ParseError(f"non-integer relevance {rel!r}", line=lineno) from None
        if rel_value not in (0, 1):
            raise ParseError(f"relevance must be 0 or 1, got {rel_value}", line=lineno)
        key = (topic_id, doc_id)
        if key in entries:
            raise ParseError(f"duplicate judgment for {key}", line=lineno)
        entries[key] = bool(rel_value)
    return JudgmentSet(grade, {k: v for k, v in entries.items() if v})


def format_document(doc: Document, joiner: str = " ") -> str:
    parts = ["<DOC>", f"<DOCNO>{doc.doc_id}</DOCNO>"]
    if doc.category:
        parts.append(f"<SECTION>{doc.category}</SECTION>")
    if doc.headline:
        parts.append(f"<HEADLINE>{joiner.join(doc.headline)}</HEADLINE>")
    parts.append(f"<TEXT>{joiner.join(doc.body)}</TEXT>")
    parts.append("</DOC>")
    return "\n".join(parts) + "\n"


def format_collection(docs: Iterable[Document], joiner: str = " ") -> str:
    return "".join(format_document(d, joiner) for d in docs)


def format_topic(topic: Topic, joiner: str = " ") -> str:
    pieces = []
    cursor = 0
    for start, end in topic.neg_regions:
        pieces.append(joiner.join(topic.narrative[cursor:start]))
        pieces.append("<NEG>" + joiner.join(topic.narrative[start:end]) + "</NEG>")
        cursor = end
    pieces.append(joiner.join(topic.narrative[cursor:]))
    narrative = " ".join(p for p in pieces if p)
    return (f"<TOPIC>\n<TOPIC-ID>{topic.topic_id}</TOPIC-ID>\n"
            f"<DESCRIPTION>{joiner.join(topic.description)}</DESCRIPTION>\n"
            f"<NARRATIVE>{narrative}</NARRATIVE>\n</TOPIC>\n")
