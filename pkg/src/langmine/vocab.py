"""Vocabulary index: persisted per-document type sets for replayable scoring.

File layout (UTF-8, one record per line)::

    #langmine-vocab<TAB>1<TAB>{"provenance": ..., "punct_normalize": ..., "min_token_len": ...}
    <id><TAB><file><TAB><json uri><TAB><langs|-><TAB><byte_len><TAB><type><TAB><type>...
    #end<TAB><record count>

Writers stream into ``<path>.partial`` and rename on success, so a crashed
shard leaves the ``.partial`` marker behind and never a plausible-looking
truncated index. Readers also require the ``#end`` footer.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import AbstractSet, Iterable, Iterator

from .docfilter import DocumentFilter, FilterConfig, ScoredDocument
from .scoring import DEFAULT_SCORE_CONFIG, ScoreConfig, TypeSet
from .warc import Document

MAGIC = "#langmine-vocab"
FORMAT_VERSION = 1
FOOTER = "#end"
PARTIAL_SUFFIX = ".partial"


class IndexFormatError(RuntimeError):
    pass


@dataclass(frozen=True)
class IndexEntry:
    doc_id: int
    source: int
    uri: str
    crawler_lang: tuple[str, ...] | None
    byte_len: int
    types: TypeSet

    def document(self) -> Document:
        return Document(self.doc_id, self.uri, self.crawler_lang, "", self.byte_len, self.source)


@dataclass
class VocabularyIndex:
    entries: dict[int, IndexEntry]
    provenance: str
    score: ScoreConfig = field(default=DEFAULT_SCORE_CONFIG)
    path: Path | None = None

    def __len__(self) -> int:
        return len(self.entries)


class IndexWriter:
    """Context manager that streams index records for one shard."""

    def __init__(self, path: str | Path, provenance: str = "", score: ScoreConfig = DEFAULT_SCORE_CONFIG):
        self.path = Path(path)
        self.partial = self.path.with_name(self.path.name + PARTIAL_SUFFIX)
        self.provenance = provenance
        self.score = score
        self.count = 0
        self._fh = None

    def __enter__(self) -> IndexWriter:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.partial, "w", encoding="utf-8", newline="\n")
        meta = {
            "provenance": self.provenance,
            "punct_normalize": self.score.punct_normalize,
            "min_token_len": self.score.min_token_len,
        }
        self._fh.write(f"{MAGIC}\t{FORMAT_VERSION}\t{json.dumps(meta, ensure_ascii=False)}\n")
        return self

    def add(self, doc: Document, types: AbstractSet[str]) -> None:
        langs = ",".join(doc.crawler_lang) if doc.crawler_lang is not None else "-"
        cols = [str(doc.id), str(doc.source), json.dumps(doc.uri, ensure_ascii=False), langs, str(doc.byte_len)]
        cols.extend(sorted(types))
        self._fh.write("\t".join(cols))
        self._fh.write("\n")
        self.count += 1

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            # leave the .partial marker so replays refuse this shard
            self._fh.close()
            return
        self._fh.write(f"{FOOTER}\t{self.count}\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._fh.close()
        os.replace(self.partial, self.path)


def write_index(
    docs: Iterable[tuple[Document, AbstractSet[str]]],
    path: str | Path,
    provenance: str = "",
    score: ScoreConfig = DEFAULT_SCORE_CONFIG,
) -> Path:
    with IndexWriter(path, provenance, score) as writer:
        for doc, types in docs:
            writer.add(doc, types)
    return writer.path


def _parse_header(line: str, path: Path) -> dict:
    parts = line.rstrip("\n").split("\t", 2)
    if len(parts) != 3 or parts[0] != MAGIC:
        raise IndexFormatError(f"{path}: not a vocabulary index")
    if parts[1] != str(FORMAT_VERSION):
        raise IndexFormatError(f"{path}: unsupported index version {parts[1]!r}")
    return json.loads(parts[2])


def is_index_file(path: str | Path) -> bool:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.readline().startswith(MAGIC)
    except (OSError, UnicodeDecodeError):
        return False


def read_index(path: str | Path) -> tuple[dict, Iterator[IndexEntry]]:
    """Open an index; returns its header metadata and a lazy entry iterator.

    The iterator raises :class:`IndexFormatError` at the end if the footer
    is missing or its count disagrees with the records read.
    """
    path = Path(path)
    partial = path.with_name(path.name + PARTIAL_SUFFIX)
    if not path.exists():
        if partial.exists():
            raise IndexFormatError(f"{path}: only a partial index exists ({partial})")
        raise FileNotFoundError(path)
    fh = open(path, encoding="utf-8")
    try:
        meta = _parse_header(fh.readline(), path)
    except Exception:
        fh.close()
        raise

    def entries() -> Iterator[IndexEntry]:
        count = 0
        with fh:
            for line in fh:
                if line.startswith(FOOTER + "\t"):
                    expected = int(line.split("\t", 1)[1])
                    if expected != count:
                        raise IndexFormatError(f"{path}: footer says {expected} records, read {count}")
                    return
                if not line.endswith("\n"):
                    break
                cols = line[:-1].split("\t")
                if len(cols) < 5:
                    raise IndexFormatError(f"{path}: bad record {line[:80]!r}")
                langs = None if cols[3] == "-" else tuple(t for t in cols[3].split(",") if t)
                yield IndexEntry(
                    int(cols[0]), int(cols[1]), json.loads(cols[2]), langs, int(cols[4]),
                    frozenset(cols[5:]),
                )
                count += 1
        raise IndexFormatError(f"{path}: truncated index (no footer)")

    return meta, entries()


def load_index(path: str | Path) -> VocabularyIndex:
    meta, entries = read_index(path)
    return VocabularyIndex(
        entries={e.doc_id: e for e in entries},
        provenance=meta.get("provenance", ""),
        score=ScoreConfig(bool(meta.get("punct_normalize")), int(meta.get("min_token_len", 1))),
        path=Path(path),
    )


def replay_index(path: str | Path, config: FilterConfig, stats=None) -> list[ScoredDocument]:
    """Re-run the document filter over stored type sets.

    The index must have been built with the same tokenization settings as
    ``config.score``; thresholds, tolerances and lexicons are free to change.
    """
    meta, entries = read_index(path)
    stored = ScoreConfig(bool(meta.get("punct_normalize")), int(meta.get("min_token_len", 1)))
    if stored != config.score:
        raise IndexFormatError(f"{path}: index built with {stored}, replay asked for {config.score}")
    dfilter = DocumentFilter(config, stats)
    out = []
    for e in entries:
        kept = dfilter.apply_types(e.document(), e.types)
        if kept is not None:
            out.append(kept)
    return out
