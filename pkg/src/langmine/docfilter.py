"""Document-level double list filtering.

Each document is scored against every target whitelist in a single pass.
Documents whose best whitelist score is below the threshold are rejected
right away; only the survivors pay for blacklist scoring, and they are
rejected when the blacklist score reaches the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import AbstractSet, Iterable, Iterator

from .lexicon import Lexicon, LexiconKind
from .scoring import DEFAULT_SCORE_CONFIG, Matcher, ScoreConfig, TypeSet, tokenize
from .warc import Document

DEFAULT_THRESHOLD = 5
DEFAULT_TOLERANCE = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FilterConfig:
    targets: tuple[Lexicon, ...]
    blacklists: tuple[Lexicon, ...] = ()
    threshold: int = DEFAULT_THRESHOLD
    tolerance: int = DEFAULT_TOLERANCE
    cache_vocabularies: bool = False
    # index every scanned document instead of only the kept ones
    index_all: bool = False
    score: ScoreConfig = DEFAULT_SCORE_CONFIG

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "blacklists", tuple(self.blacklists))
        if self.threshold < 1:
            raise ConfigError("threshold must be >= 1")
        if self.tolerance < 1:
            raise ConfigError("tolerance must be >= 1")
        if not self.targets:
            raise ConfigError("at least one target whitelist is required")
        codes = [lex.language_code for lex in self.targets]
        if len(set(codes)) != len(codes):
            raise ConfigError(f"duplicate target language codes: {codes}")
        for lex in self.targets:
            if lex.kind is not LexiconKind.WHITELIST:
                raise ConfigError(f"target {lex.language_code!r} is not a whitelist")

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(lex.language_code for lex in self.targets)

    def replace(self, **changes) -> FilterConfig:
        return replace(self, **changes)


@dataclass
class FilterStats:
    documents: int = 0
    kept: int = 0
    below_threshold: int = 0
    blacklisted: int = 0
    blacklist_evaluations: int = 0

    def merge(self, other: FilterStats) -> None:
        self.documents += other.documents
        self.kept += other.kept
        self.below_threshold += other.below_threshold
        self.blacklisted += other.blacklisted
        self.blacklist_evaluations += other.blacklist_evaluations

    def rejection_breakdown(self) -> dict[str, int]:
        return {"below_threshold": self.below_threshold, "blacklisted": self.blacklisted}


@dataclass(eq=False)
class ScoredDocument:
    """A kept document with its per-language whitelist scores.

    Equality ignores the text and cached types so that documents replayed
    from a vocabulary index compare equal to ones scored from raw text.
    """

    document: Document
    wsc: dict[str, int]
    bsc: int
    types: TypeSet | None = field(default=None, repr=False)

    @property
    def id(self) -> int:
        return self.document.id

    @property
    def uri(self) -> str:
        return self.document.uri

    def signature(self) -> tuple:
        d = self.document
        return (d.source, d.id, d.uri, d.crawler_lang, tuple(sorted(self.wsc.items())), self.bsc)

    def __eq__(self, other):
        if not isinstance(other, ScoredDocument):
            return NotImplemented
        return self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    def type_set(self, config: ScoreConfig = DEFAULT_SCORE_CONFIG) -> TypeSet:
        if self.types is None:
            self.types = tokenize(self.document.text, config)
        return self.types

    def to_record(self) -> dict:
        d = self.document
        return {
            "id": d.id,
            "file": d.source,
            "uri": d.uri,
            "lang": list(d.crawler_lang) if d.crawler_lang is not None else None,
            "wsc": self.wsc,
            "bsc": self.bsc,
            "text": d.text,
        }

    @classmethod
    def from_record(cls, rec: dict) -> ScoredDocument:
        text = rec.get("text") or ""
        lang = rec.get("lang")
        doc = Document(
            int(rec["id"]),
            rec.get("uri", ""),
            tuple(lang) if lang is not None else None,
            text,
            int(rec.get("bytes", len(text.encode("utf-8")))),
            int(rec.get("file", 0)),
        )
        return cls(doc, {k: int(v) for k, v in rec["wsc"].items()}, int(rec.get("bsc", 0)))


class DocumentFilter:
    """Compiled form of a :class:`FilterConfig`; holds per-shard counters."""

    def __init__(self, config: FilterConfig, stats: FilterStats | None = None):
        self.config = config
        self.stats = stats if stats is not None else FilterStats()
        self._codes = config.languages
        self._white = Matcher(config.targets, config.score.min_token_len)
        self._black = Matcher(config.blacklists, config.score.min_token_len) if config.blacklists else None

    def _decide(self, doc: Document, wsc: list[int], black_counts, types=None) -> ScoredDocument | None:
        st = self.stats
        st.documents += 1
        if max(wsc) < self.config.threshold:
            st.below_threshold += 1
            return None
        bsc = 0
        if self._black is not None:
            st.blacklist_evaluations += 1
            bsc = max(black_counts())
            if bsc >= self.config.tolerance:
                st.blacklisted += 1
                return None
        st.kept += 1
        return ScoredDocument(doc, dict(zip(self._codes, wsc)), bsc, types)

    def __call__(self, doc: Document) -> ScoredDocument | None:
        text, score = doc.text, self.config.score
        wsc = self._white.counts_text(text, score)
        black = self._black
        return self._decide(doc, wsc, lambda: black.counts_text(text, score))

    def apply_types(self, doc: Document, types: AbstractSet[str]) -> ScoredDocument | None:
        """Same decision from a stored type set (index replay)."""
        wsc = self._white.counts_types(types)
        black = self._black
        return self._decide(doc, wsc, lambda: black.counts_types(types), frozenset(types))

    def run(self, docs: Iterable[Document]) -> Iterator[ScoredDocument]:
        for doc in docs:
            kept = self(doc)
            if kept is not None:
                yield kept


def filter_document(
    doc: Document, config: FilterConfig, stats: FilterStats | None = None
) -> ScoredDocument | None:
    """Filter a single document. Prefer :class:`DocumentFilter` in loops."""
    return DocumentFilter(config, stats)(doc)


def filter_documents(
    docs: Iterable[Document], config: FilterConfig, stats: FilterStats | None = None
) -> list[ScoredDocument]:
    return list(DocumentFilter(config, stats).run(docs))


def rank_key(scored: ScoredDocument, language: str) -> tuple[int, int, int]:
    d = scored.document
    return (-scored.wsc[language], d.source, d.id)


def rank(scored: Iterable[ScoredDocument], language: str) -> list[ScoredDocument]:
    """Descending whitelist score for ``language``; ties by input order."""
    return sorted(scored, key=lambda s: rank_key(s, language))


def select_language(
    scored: Iterable[ScoredDocument], language: str, threshold: int
) -> list[ScoredDocument]:
    """Kept documents that pass the threshold for this particular language."""
    return [s for s in scored if s.wsc.get(language, 0) >= threshold]
