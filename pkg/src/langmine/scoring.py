"""Tokenization and type-set scoring.

Documents are reduced to their set of distinct whitespace tokens (types)
after case folding, and a lexicon score is the size of the intersection
with the lexicon. Token frequency is ignored on purpose: repeating a
sentence cannot raise a score.

:class:`Matcher` is the hot path used by the filters. It scores several
lexicons in one scan of the folded text and, when the compiled
``_match`` extension is available, does so without allocating token
strings.
"""

from __future__ import annotations

import functools
import sys
import unicodedata
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Sequence

from .lexicon import Lexicon

try:
    from ._match import MatchTable as _MatchTable
except ImportError:  # pragma: no cover - exercised when the extension is not built
    _MatchTable = None

HAVE_ACCELERATOR = _MatchTable is not None

TypeSet = frozenset  # frozenset[str] of folded, non-empty, whitespace-free tokens

# symbols outside the P* categories that show up glued to web tokens
_EXTRA_PUNCT = "`^|~<>+=*/\\$%&@#…·•¨´"


@dataclass(frozen=True)
class ScoreConfig:
    punct_normalize: bool = False
    min_token_len: int = 1

    def __post_init__(self):
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")


DEFAULT_SCORE_CONFIG = ScoreConfig()


@functools.lru_cache(maxsize=1)
def punctuation_chars() -> frozenset[str]:
    """All characters replaced by a space under punctuation normalization."""
    chars = {
        chr(cp)
        for cp in range(sys.maxunicode + 1)
        if unicodedata.category(chr(cp)).startswith("P")
    }
    chars.update(_EXTRA_PUNCT)
    return frozenset(chars)


@functools.lru_cache(maxsize=1)
def _punct_table() -> dict[int, int]:
    return {ord(c): 0x20 for c in punctuation_chars()}


def normalize(text: str, config: ScoreConfig = DEFAULT_SCORE_CONFIG) -> str:
    """Case-fold and optionally blank out punctuation; whitespace is preserved."""
    text = text.casefold()
    if config.punct_normalize:
        text = text.translate(_punct_table())
    return text


def tokenize(text: str, config: ScoreConfig = DEFAULT_SCORE_CONFIG) -> TypeSet:
    """Distinct folded whitespace tokens of ``text``."""
    tokens = normalize(text, config).split()
    n = config.min_token_len
    if n > 1:
        return frozenset(t for t in tokens if len(t) >= n)
    return frozenset(tokens)


def score(types: AbstractSet[str], lexicon: Lexicon) -> int:
    """Number of lexicon types present in ``types`` (boolean match per type)."""
    return len(lexicon.types.intersection(types))


class Matcher:
    """Scores normalized text against a fixed sequence of lexicons.

    ``counts(normalize(text))[i] == score(tokenize(text), lexicons[i])`` for
    every input; the compiled table only avoids building the type set.
    A Matcher keeps per-call scratch state, so give each thread its own.
    """

    def __init__(self, lexicons: Sequence[Lexicon], min_token_len: int = 1, accelerate: bool = True):
        self.lexicons = tuple(lexicons)
        self.codes = tuple(lex.language_code for lex in self.lexicons)
        self.min_token_len = min_token_len
        self._sets = [lex.types for lex in self.lexicons]
        self._union = frozenset().union(*self._sets)
        self._table = None
        if accelerate and _MatchTable is not None and 0 < len(self.lexicons) <= 64:
            self._table = _MatchTable([lex.types for lex in self.lexicons], min_token_len)

    def __reduce__(self):
        return (Matcher, (self.lexicons, self.min_token_len, self._table is not None))

    @property
    def accelerated(self) -> bool:
        return self._table is not None

    def counts(self, normalized: str) -> list[int]:
        if not self._sets:
            return []
        if self._table is not None:
            return self._table.counts(normalized)
        tokens: Iterable[str] = normalized.split()
        if self.min_token_len > 1:
            n = self.min_token_len
            tokens = [t for t in tokens if len(t) >= n]
        present = self._union.intersection(tokens)
        if len(self._sets) == 1:
            return [len(present)]
        return [len(present & s) for s in self._sets]

    def counts_text(self, text: str, config: ScoreConfig = DEFAULT_SCORE_CONFIG) -> list[int]:
        """Scores of raw ``text``; equals ``counts(normalize(text, config))``."""
        if self._table is not None and not config.punct_normalize:
            out = self._table.counts_unfolded(text)
            if out is not None:
                return out
        return self.counts(normalize(text, config))

    def counts_types(self, types: AbstractSet[str]) -> list[int]:
        """Same scores, from an already tokenized type set."""
        present = self._union.intersection(types)
        return [len(present & s) for s in self._sets]
