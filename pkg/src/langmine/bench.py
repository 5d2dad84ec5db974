"""Needle/hay benchmarks: recall, false-positive rate and speed per threshold.

Two corpus sources are supported. Operator-supplied dumps (JSONL with a
``text`` field, or WET files) are sampled with :func:`build_benchmark`.
The synthetic generator plants an exact number of distinct whitelist
types into every document, so the expected true/false positive counts at
each threshold follow directly from the planting schedule.
"""

from __future__ import annotations

import csv
import json
import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .docfilter import DocumentFilter, FilterConfig
from .lexicon import Lexicon, build_lexicon
from .scoring import DEFAULT_SCORE_CONFIG, ScoreConfig
from .warc import Document, read_wet_file

NEEDLE = "needle"
HAY = "hay"
DEFAULT_THRESHOLDS = (1, 3, 5, 10, 15)


class BenchmarkError(ValueError):
    pass


@dataclass
class BenchmarkCorpus:
    documents: list[tuple[Document, str]]
    needle_count: int
    hay_count: int
    skip_word: str | None = None
    seed: int = 0
    excluded_hay: int = 0

    def __len__(self) -> int:
        return len(self.documents)


@dataclass
class BenchResult:
    threshold: int
    true_positives: int
    false_positives: int
    recall_pct: float
    fpr_pct: float
    wall_time: float


def _as_document(item, i: int) -> Document:
    if isinstance(item, Document):
        return item
    return Document(i, "", None, item, len(item.encode("utf-8")))


def _reservoir(items: Iterable, k: int, rng: random.Random, keep=None) -> tuple[list, int, int]:
    """Uniform sample of ``k`` items without replacement; also returns how
    many items were eligible and how many ``keep`` rejected."""
    sample: list = []
    seen = rejected = 0
    for i, item in enumerate(items):
        doc = _as_document(item, i)
        if keep is not None and not keep(doc):
            rejected += 1
            continue
        if len(sample) < k:
            sample.append(doc)
        else:
            j = rng.randrange(seen + 1)
            if j < k:
                sample[j] = doc
        seen += 1
    return sample, seen, rejected


def build_benchmark(
    needle_source: Iterable[Document | str],
    hay_source: Iterable[Document | str],
    needle_count: int,
    hay_count: int,
    skip_word: str | None = None,
    seed: int = 0,
) -> BenchmarkCorpus:
    """Sample a shuffled needle/hay corpus; ids are reassigned 0..N-1.

    Hay documents containing ``skip_word`` (case-insensitive substring) are
    excluded before sampling, so contaminated hay cannot be counted as a
    false positive.
    """
    rng = random.Random(seed)
    needles, n_seen, _ = _reservoir(needle_source, needle_count, rng)
    keep = None
    if skip_word:
        folded = skip_word.casefold()
        keep = lambda d: folded not in d.text.casefold()  # noqa: E731
    hay, h_seen, excluded = _reservoir(hay_source, hay_count, rng, keep)
    if n_seen < needle_count or h_seen < hay_count:
        raise BenchmarkError(
            f"not enough source documents: needles short by {max(0, needle_count - n_seen)}, "
            f"hay short by {max(0, hay_count - h_seen)}"
        )
    labelled = [(d, NEEDLE) for d in needles] + [(d, HAY) for d in hay]
    rng.shuffle(labelled)
    docs = [
        (Document(i, d.uri, d.crawler_lang, d.text, d.byte_len), label)
        for i, (d, label) in enumerate(labelled)
    ]
    return BenchmarkCorpus(docs, needle_count, hay_count, skip_word, seed, excluded)


def run_benchmark(
    corpus: BenchmarkCorpus,
    lexicons: Sequence[Lexicon],
    thresholds: Iterable[int] = DEFAULT_THRESHOLDS,
    blacklists: Sequence[Lexicon] = (),
    tolerance: int = 1,
    score: ScoreConfig = DEFAULT_SCORE_CONFIG,
    target: str | None = None,
) -> list[BenchResult]:
    """Filter the corpus once per threshold and compare to the gold labels.

    ``target`` defaults to the first lexicon; extra lexicons are scored
    alongside it (multi-language runs) but only the target is evaluated.
    Wall time covers filtering only, not corpus construction.
    """
    target = target or lexicons[0].language_code
    docs = [d for d, _ in corpus.documents]
    gold = {d.id: label for d, label in corpus.documents}
    results = []
    for t in thresholds:
        config = FilterConfig(tuple(lexicons), tuple(blacklists), threshold=t, tolerance=tolerance, score=score)
        dfilter = DocumentFilter(config)
        start = time.perf_counter()
        kept = [s for s in dfilter.run(docs) if s.wsc[target] >= t]
        elapsed = time.perf_counter() - start
        tp = sum(1 for s in kept if gold[s.id] == NEEDLE)
        fp = len(kept) - tp
        results.append(BenchResult(
            threshold=t,
            true_positives=tp,
            false_positives=fp,
            recall_pct=100.0 * tp / corpus.needle_count if corpus.needle_count else 0.0,
            fpr_pct=100.0 * fp / corpus.hay_count if corpus.hay_count else 0.0,
            wall_time=elapsed,
        ))
    return results


def mean_wall_time(results: Sequence[BenchResult]) -> float:
    return sum(r.wall_time for r in results) / len(results) if results else 0.0


def write_results(results: Sequence[BenchResult], path: str | Path, manifest: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(BenchResult.__dataclass_fields__))
        writer.writeheader()
        for r in results:
            writer.writerow(asdict(r))
    meta = dict(manifest or {})
    meta["mean_wall_time"] = mean_wall_time(results)
    with open(path.with_name(path.name + ".manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, ensure_ascii=False)


def write_corpus(corpus: BenchmarkCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc, label in corpus.documents:
            fh.write(json.dumps({"gold": label, "text": doc.text}, ensure_ascii=False) + "\n")


def read_corpus(path: str | Path, seed: int = 0) -> BenchmarkCorpus:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                docs.append((_as_document(rec["text"], len(docs)), rec["gold"]))
    n = sum(1 for _, g in docs if g == NEEDLE)
    return BenchmarkCorpus(docs, n, len(docs) - n, seed=seed)


def load_text_source(path: str | Path) -> Iterable[Document]:
    """Documents from a JSONL dump (``text`` and optional ``url``) or a WET file."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head == b"WARC/":
        yield from read_wet_file(path)
        return
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if line.strip():
                rec = json.loads(line)
                text = rec["text"]
                yield Document(i, rec.get("url", ""), None, text, len(text.encode("utf-8")))


# --- synthetic corpora -----------------------------------------------------

# planted distinct-whitelist-type count -> number of documents
NEEDLE_SCHEDULE = {
    0: 2, 1: 2, 2: 4, 3: 8, 4: 10, 5: 14, 6: 18, 7: 20, 8: 22, 9: 20,
    10: 18, 11: 16, 12: 14, 13: 10, 14: 8, 15: 6, 16: 4, 17: 2, 18: 2,
}
HAY_SCHEDULE = {
    0: 9000, 1: 500, 2: 150, 3: 80, 4: 40, 5: 20, 6: 6, 7: 2, 8: 1, 9: 1,
}


@dataclass
class PlantSchedule:
    needles: dict[int, int] = field(default_factory=lambda: dict(NEEDLE_SCHEDULE))
    hay: dict[int, int] = field(default_factory=lambda: dict(HAY_SCHEDULE))

    @property
    def needle_count(self) -> int:
        return sum(self.needles.values())

    @property
    def hay_count(self) -> int:
        return sum(self.hay.values())

    def expected(self, threshold: int) -> tuple[int, int]:
        """(true positives, false positives) implied by the schedule."""
        tp = sum(n for k, n in self.needles.items() if k >= threshold)
        fp = sum(n for k, n in self.hay.items() if k >= threshold)
        return tp, fp

    def mean_planted(self, which: str) -> float:
        hist = self.needles if which == NEEDLE else self.hay
        return sum(k * n for k, n in hist.items()) / sum(hist.values())


_SYLLABLES_WL = ["ka", "kò", "zo", "zè", "wa", "wè", "ti", "pi", "la", "pou", "kou", "lé", "sé", "an", "yo", "mò"]


def _pseudo_words(rng: random.Random, n: int, syllables: Sequence[str], lo: int, hi: int, exclude=()) -> list[str]:
    words: set[str] = set()
    exclude = set(exclude)
    while len(words) < n:
        w = "".join(rng.choice(syllables) for _ in range(rng.randint(lo, hi)))
        if len(w) >= 3 and w not in exclude:
            words.add(w)
    return sorted(words)


@dataclass
class SyntheticBenchmark:
    corpus: BenchmarkCorpus
    whitelist: Lexicon
    filler: list[str]
    schedule: PlantSchedule
    planted: dict[int, int]  # doc id -> planted distinct whitelist types


class SyntheticGenerator:
    """Builds documents with an exact number of distinct whitelist types."""

    def __init__(self, seed: int = 0, whitelist_size: int = 400, filler_size: int = 4000, language_code: str = "syn"):
        self.rng = random.Random(seed)
        self.whitelist_words = _pseudo_words(self.rng, whitelist_size, _SYLLABLES_WL, 2, 3)
        filler_syll = [c + v for c in "bdfgmnrstv" for v in "aeiou"] + ["on", "eau", "ent", "que"]
        self.filler = _pseudo_words(self.rng, filler_size, filler_syll, 1, 4, exclude=self.whitelist_words)
        self.whitelist = build_lexicon(self.whitelist_words, language_code, "whitelist", min_type_len=3)

    def text(self, planted: int, tokens: int | None = None, extra_words: Sequence[str] = ()) -> str:
        rng = self.rng
        n = tokens if tokens is not None else rng.randint(80, 220)
        words = [rng.choice(self.filler) for _ in range(n)]
        for i in range(0, len(words), 9):
            if rng.random() < 0.3:
                words[i] = words[i] + rng.choice(",.;:")
        chosen = rng.sample(self.whitelist_words, planted)
        for w in chosen:
            for _ in range(rng.randint(1, 3)):
                form = rng.choice((w, w, w.capitalize(), w.upper()))
                words.insert(rng.randrange(len(words) + 1), form)
        for w in extra_words:
            words.insert(rng.randrange(len(words) + 1), w)
        lines = []
        i = 0
        while i < len(words):
            step = rng.randint(6, 18)
            lines.append(" ".join(words[i:i + step]))
            i += step
        return "\n".join(lines)


def synthetic_benchmark(
    schedule: PlantSchedule | None = None,
    seed: int = 0,
    skip_word: str | None = "créole",
    contaminated: int = 0,
) -> SyntheticBenchmark:
    """Planted corpus; ``contaminated`` extra hay documents carry ``skip_word``
    and a high plant count, and must be removed by the skip rule."""
    schedule = schedule or PlantSchedule()
    gen = SyntheticGenerator(seed)
    needles, hay = [], []
    planted_by_text: dict[str, int] = {}

    def make(k: int, extra=()) -> Document:
        text = gen.text(k, extra_words=extra)
        planted_by_text[text] = k
        return Document(0, f"https://synthetic.example/{len(planted_by_text)}", None, text, len(text.encode()))

    for k, n in sorted(schedule.needles.items()):
        needles.extend(make(k) for _ in range(n))
    for k, n in sorted(schedule.hay.items()):
        hay.extend(make(k) for _ in range(n))
    if contaminated:
        if not skip_word:
            raise BenchmarkError("contaminated hay needs a skip word")
        hay.extend(make(12, extra=(skip_word,)) for _ in range(contaminated))
        gen.rng.shuffle(hay)
    corpus = build_benchmark(needles, hay, schedule.needle_count, schedule.hay_count, skip_word, seed)
    planted = {d.id: planted_by_text[d.text] for d, _ in corpus.documents}
    return SyntheticBenchmark(corpus, gen.whitelist, gen.filler, schedule, planted)
