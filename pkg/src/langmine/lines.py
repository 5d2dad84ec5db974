"""Line-level ranking inside kept documents.

A line's score is its number of distinct whitelist types divided by its
length in code points, so short lines dense in target types rise to the
top and long runs of noise that hit a few types by chance sink.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator

from .docfilter import ScoredDocument
from .lexicon import Lexicon
from .scoring import DEFAULT_SCORE_CONFIG, Matcher, ScoreConfig

DEFAULT_MIN_LINE_LEN = 15


@dataclass
class RankedLine:
    doc_id: int
    line_no: int
    text: str
    matches: int
    norm_score: float
    dup_count: int = 1
    source: int = 0

    def sort_key(self) -> tuple[float, int, int, int]:
        return (-self.norm_score, self.source, self.doc_id, self.line_no)

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "file": self.source,
            "line_no": self.line_no,
            "norm_score": self.norm_score,
            "matches": self.matches,
            "dup_count": self.dup_count,
            "text": self.text,
        }

    @classmethod
    def from_record(cls, rec: dict) -> RankedLine:
        return cls(
            rec["doc_id"], rec["line_no"], rec["text"], rec["matches"],
            rec["norm_score"], rec.get("dup_count", 1), rec.get("file", 0),
        )


def score_line(line: str, matcher: Matcher, config: ScoreConfig = DEFAULT_SCORE_CONFIG) -> tuple[int, float]:
    matches = matcher.counts_text(line, config)[0]
    return matches, matches / len(line)


def rank_lines(
    doc: ScoredDocument,
    whitelist: Lexicon,
    min_line_len: int = DEFAULT_MIN_LINE_LEN,
    config: ScoreConfig = DEFAULT_SCORE_CONFIG,
    matcher: Matcher | None = None,
) -> list[RankedLine]:
    """Score and sort the lines of one document.

    Lines are split on ``\\n`` only; lines shorter than ``min_line_len``
    (and empty lines, always) are dropped before scoring.
    """
    if matcher is None:
        matcher = Matcher([whitelist], config.min_token_len)
    d = doc.document
    out = []
    for line_no, line in enumerate(d.text.split("\n")):
        if not line or len(line) < min_line_len:
            continue
        matches, norm = score_line(line, matcher, config)
        out.append(RankedLine(d.id, line_no, line, matches, norm, 1, d.source))
    out.sort(key=RankedLine.sort_key)
    return out


def merge_ranked(runs: Iterable[Iterable[RankedLine]]) -> Iterator[RankedLine]:
    """k-way merge of individually sorted line runs."""
    return heapq.merge(*runs, key=RankedLine.sort_key)


def _dup_key(line: RankedLine) -> str:
    return line.text.strip().casefold()


def iter_clustered(lines: Iterable[RankedLine]) -> Iterator[RankedLine]:
    """Streaming form of :func:`cluster_duplicates`."""
    run_score = None
    run: dict[str, RankedLine] = {}
    for line in lines:
        if line.norm_score != run_score:
            yield from run.values()
            run = {}
            run_score = line.norm_score
        key = _dup_key(line)
        rep = run.get(key)
        if rep is None:
            run[key] = RankedLine(
                line.doc_id, line.line_no, line.text, line.matches,
                line.norm_score, line.dup_count, line.source,
            )
        else:
            rep.dup_count += line.dup_count
            if (line.source, line.doc_id, line.line_no) < (rep.source, rep.doc_id, rep.line_no):
                rep.doc_id, rep.line_no, rep.source, rep.text = line.doc_id, line.line_no, line.source, line.text
    yield from run.values()


def cluster_duplicates(lines: Iterable[RankedLine]) -> list[RankedLine]:
    """Collapse lines with the same trimmed, case-folded text.

    Only lines inside one run of equal ``norm_score`` are compared, which is
    where exact duplicates land after ranking. The representative is the
    lowest ``(source, doc_id, line_no)`` and carries the summed count.
    """
    return list(iter_clustered(lines))
