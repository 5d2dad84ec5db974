"""Whitelist / blacklist type sets.

A lexicon file is UTF-8, one type per line, ``#`` starts a comment line.
Types are case-folded and trimmed at load time; anything shorter than
``min_type_len`` (counted in code points) is rejected so that one- and
two-letter entries cannot be matched by letter-spaced noise.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

logger = logging.getLogger(__name__)

DEFAULT_MIN_TYPE_LEN = 3


class LexiconError(ValueError):
    """Raised when a wordlist cannot produce a usable lexicon."""


class LexiconKind(str, enum.Enum):
    WHITELIST = "whitelist"
    BLACKLIST = "blacklist"


@dataclass(frozen=True)
class Lexicon:
    language_code: str
    kind: LexiconKind
    types: frozenset[str]
    min_type_len: int = DEFAULT_MIN_TYPE_LEN
    rejected_short: int = field(default=0, compare=False)
    rejected_multiword: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.min_type_len < 1:
            raise LexiconError("min_type_len must be >= 1")
        if not self.types:
            raise LexiconError(f"lexicon {self.language_code!r} has no types")
        for t in self.types:
            if len(t) < self.min_type_len:
                raise LexiconError(f"type {t!r} shorter than {self.min_type_len}")
            if t != t.casefold() or any(c.isspace() for c in t):
                raise LexiconError(f"type {t!r} is not folded or contains whitespace")

    def __len__(self) -> int:
        return len(self.types)

    def __contains__(self, token: str) -> bool:
        return token in self.types


def build_lexicon(
    words: Iterable[str],
    language_code: str,
    kind: LexiconKind | str = LexiconKind.WHITELIST,
    min_type_len: int = DEFAULT_MIN_TYPE_LEN,
) -> Lexicon:
    """Fold, trim and length-filter raw words into a :class:`Lexicon`."""
    kind = LexiconKind(kind)
    types: set[str] = set()
    short = multi = 0
    for raw in words:
        word = raw.strip()
        if not word or word.startswith("#"):
            continue
        word = word.casefold()
        if any(c.isspace() for c in word):
            multi += 1
            continue
        if len(word) < min_type_len:
            short += 1
            continue
        types.add(word)
    if not types:
        raise LexiconError(
            f"no admissible types for {language_code!r} "
            f"({short} too short, {multi} multiword)"
        )
    return Lexicon(
        language_code=language_code,
        kind=kind,
        types=frozenset(types),
        min_type_len=min_type_len,
        rejected_short=short,
        rejected_multiword=multi,
    )


def load_lexicon(
    path: str | Path,
    kind: LexiconKind | str = LexiconKind.WHITELIST,
    min_type_len: int = DEFAULT_MIN_TYPE_LEN,
    language_code: str | None = None,
) -> Lexicon:
    """Load a newline-delimited wordlist.

    ``language_code`` defaults to the file stem (``wordlists/gcr.txt`` ->
    ``gcr``). Raises :class:`LexiconError` if nothing survives filtering and
    ``OSError`` if the file cannot be read.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lexicon = build_lexicon(fh, language_code or path.stem, kind, min_type_len)
    if lexicon.rejected_short or lexicon.rejected_multiword:
        logger.info(
            "%s: kept %d types, rejected %d short and %d multiword entries",
            path, len(lexicon), lexicon.rejected_short, lexicon.rejected_multiword,
        )
    return lexicon


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {lexicon.language_code} {lexicon.kind.value}\n")
        for t in sorted(lexicon.types):
            fh.write(t + "\n")


class Overlap(NamedTuple):
    count: int
    sample: list[str]


def overlap_report(a: Lexicon, b: Lexicon, max_examples: int = 20) -> Overlap:
    """Shared types between two lexicons, for spotting collision-prone lists."""
    shared = a.types & b.types
    return Overlap(len(shared), sorted(shared)[:max_examples])
