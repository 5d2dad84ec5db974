"""Refinement of first-pass output for one target language.

Stages: a loading threshold applied while reading, then three pure drop
filters (crawler language blocklist, closely related languages scoring
higher than the target, URL source blocklist). Because each drop filter
is a predicate on a single document, their order does not change the set
of survivors, only which reason gets recorded in the audit log.
"""

from __future__ import annotations

import fnmatch
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

import yaml

from .docfilter import ConfigError, ScoredDocument
from .lexicon import DEFAULT_MIN_TYPE_LEN, Lexicon, load_lexicon
from .scoring import DEFAULT_SCORE_CONFIG, Matcher, ScoreConfig
from .vocab import is_index_file, read_index

logger = logging.getLogger(__name__)

STAGES = ("crawler_language", "related_languages", "sources")
_GLOB_CHARS = set("*?[")


class UrlPattern:
    """Case-insensitive substring, or glob when the pattern has ``*?[``."""

    def __init__(self, pattern: str):
        if not pattern or not pattern.strip():
            raise ConfigError("empty URL pattern")
        self.pattern = pattern
        folded = pattern.casefold()
        self.is_glob = bool(_GLOB_CHARS & set(pattern))
        if self.is_glob:
            _check_glob(pattern)
            self._regex = re.compile(fnmatch.translate(folded), re.DOTALL)
        else:
            self._needle = folded

    def matches(self, uri: str) -> bool:
        folded = uri.casefold()
        if self.is_glob:
            return self._regex.match(folded) is not None
        return self._needle in folded

    def __repr__(self):
        return f"UrlPattern({self.pattern!r})"


def _check_glob(pattern: str) -> None:
    i = 0
    while i < len(pattern):
        if pattern[i] == "[":
            j = pattern.find("]", i + 2 if pattern[i + 1:i + 2] in ("!", "]") else i + 1)
            if j < 0:
                raise ConfigError(f"malformed glob (unclosed '['): {pattern!r}")
            i = j
        i += 1


@dataclass
class SecondPassConfig:
    target: str
    loading_threshold: int | None = None  # None: the first-pass threshold
    blocked_crawler_langs: frozenset[str] = frozenset()
    related_targets: tuple[Lexicon, ...] = ()
    blocked_url_patterns: tuple[str, ...] = ()
    order: tuple[str, ...] = STAGES
    score: ScoreConfig = DEFAULT_SCORE_CONFIG
    first_pass_threshold: int | None = None
    url_patterns: list[UrlPattern] = field(init=False, repr=False)

    def __post_init__(self):
        self.blocked_crawler_langs = frozenset(t.strip().casefold() for t in self.blocked_crawler_langs)
        self.related_targets = tuple(self.related_targets)
        self.blocked_url_patterns = tuple(self.blocked_url_patterns)
        self.url_patterns = [UrlPattern(p) for p in self.blocked_url_patterns]
        self.order = tuple(self.order)
        if sorted(self.order) != sorted(STAGES):
            raise ConfigError(f"order must be a permutation of {STAGES}, got {self.order}")
        if self.loading_threshold is None and self.first_pass_threshold is not None:
            self.loading_threshold = self.first_pass_threshold
        if self.loading_threshold is not None and self.loading_threshold < 1:
            raise ConfigError("loading_threshold must be >= 1")
        if (
            self.first_pass_threshold is not None
            and self.loading_threshold is not None
            and self.loading_threshold < self.first_pass_threshold
        ):
            raise ConfigError(
                f"loading_threshold {self.loading_threshold} is below the first-pass "
                f"threshold {self.first_pass_threshold}"
            )
        if any(lex.language_code == self.target for lex in self.related_targets):
            raise ConfigError("the target cannot also be a related language")


def load_config(path: str | Path, **overrides) -> SecondPassConfig:
    """Read a YAML second-pass config; wordlist paths are relative to the file.

    Example::

        target: acf
        loading_threshold: 10
        blocked_crawler_langs: [swe, ron, tur]
        related_targets: {gcr: wordlists/gcr.txt, hat: wordlists/hat.txt}
        blocked_url_patterns: [gcr.wikipedia.org]
        min_type_len: 3
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict) or "target" not in raw:
        raise ConfigError(f"{path}: a mapping with at least 'target' is required")
    min_len = int(raw.get("min_type_len", DEFAULT_MIN_TYPE_LEN))
    related = []
    for code, wl in (raw.get("related_targets") or {}).items():
        wl_path = Path(wl)
        if not wl_path.is_absolute():
            wl_path = path.parent / wl_path
        related.append(load_lexicon(wl_path, "whitelist", min_len, language_code=str(code)))
    kwargs = dict(
        target=str(raw["target"]),
        loading_threshold=int(raw["loading_threshold"]) if raw.get("loading_threshold") is not None else None,
        blocked_crawler_langs=frozenset(raw.get("blocked_crawler_langs") or ()),
        related_targets=tuple(related),
        blocked_url_patterns=tuple(raw.get("blocked_url_patterns") or ()),
        order=tuple(raw.get("order") or STAGES),
    )
    kwargs.update(overrides)
    return SecondPassConfig(**kwargs)


def load_candidates(
    path: str | Path,
    config: SecondPassConfig,
    target_lexicon: Lexicon | None = None,
) -> Iterator[ScoredDocument]:
    """Stream first-pass documents with ``wsc[target] >= loading_threshold``.

    ``path`` is either a ranked first-pass JSONL file (sorted by descending
    score, so reading stops at the first document below the threshold) or a
    vocabulary index, which needs ``target_lexicon`` to score.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"first-pass input not found: {path}")
    if is_index_file(path):
        if target_lexicon is None:
            raise ConfigError("scoring a vocabulary index needs the target lexicon")
        yield from _candidates_from_index(path, config, target_lexicon)
        return
    target, cutoff = config.target, config.loading_threshold or 1
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            wsc = rec["wsc"].get(target, 0)
            if wsc < cutoff:
                break
            yield ScoredDocument.from_record(rec)


def _candidates_from_index(path: Path, config: SecondPassConfig, lexicon: Lexicon) -> Iterator[ScoredDocument]:
    matcher = Matcher([lexicon])
    _, entries = read_index(path)
    for e in entries:
        wsc = matcher.counts_types(e.types)[0]
        if wsc >= (config.loading_threshold or 1):
            yield ScoredDocument(e.document(), {config.target: wsc}, 0, e.types)


# Drop predicates: return a reason string to drop, None to keep.

def crawler_language_reason(doc: ScoredDocument, config: SecondPassConfig) -> str | None:
    langs = doc.document.crawler_lang
    if not langs or not config.blocked_crawler_langs:
        return None
    hit = sorted({t.casefold() for t in langs} & config.blocked_crawler_langs)
    return f"crawler_language:{','.join(hit)}" if hit else None


class _RelatedScorer:
    def __init__(self, config: SecondPassConfig):
        self.config = config
        self.matcher = Matcher(config.related_targets, config.score.min_token_len) if config.related_targets else None

    def __call__(self, doc: ScoredDocument) -> str | None:
        if self.matcher is None:
            return None
        target = doc.wsc.get(self.config.target, 0)
        counts = self.matcher.counts_types(doc.type_set(self.config.score))
        worse = [f"{code}={c}" for code, c in zip(self.matcher.codes, counts) if c > target]
        return f"related_languages:{';'.join(worse)}>{target}" if worse else None


def source_reason(doc: ScoredDocument, config: SecondPassConfig) -> str | None:
    for pat in config.url_patterns:
        if pat.matches(doc.document.uri):
            return f"sources:{pat.pattern}"
    return None


def filter_crawler_language(docs: Iterable[ScoredDocument], config: SecondPassConfig) -> list[ScoredDocument]:
    return [d for d in docs if crawler_language_reason(d, config) is None]


def filter_related_languages(docs: Iterable[ScoredDocument], config: SecondPassConfig) -> list[ScoredDocument]:
    """Drop documents that a related language explains strictly better; ties stay."""
    scorer = _RelatedScorer(config)
    return [d for d in docs if scorer(d) is None]


def filter_sources(docs: Iterable[ScoredDocument], config: SecondPassConfig) -> list[ScoredDocument]:
    return [d for d in docs if source_reason(d, config) is None]


def stage_predicates(config: SecondPassConfig) -> list[tuple[str, Callable[[ScoredDocument], str | None]]]:
    table = {
        "crawler_language": lambda d: crawler_language_reason(d, config),
        "related_languages": _RelatedScorer(config),
        "sources": lambda d: source_reason(d, config),
    }
    return [(name, table[name]) for name in config.order]


def refine(
    docs: Iterable[ScoredDocument], config: SecondPassConfig
) -> Iterator[tuple[ScoredDocument, str | None]]:
    """Yield ``(doc, drop_reason)``; reason is None for survivors."""
    stages = stage_predicates(config)
    for doc in docs:
        reason = None
        for _, pred in stages:
            reason = pred(doc)
            if reason is not None:
                break
        yield doc, reason
