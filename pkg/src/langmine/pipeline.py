"""Sharded first pass and single-job second pass.

The sharding unit is one input file. Every file is filtered independently
into per-language runs sorted by ``(-wsc, file, id)``; a k-way merge of the
runs then produces the global ranking, which is therefore identical for
any number of worker processes.
"""

from __future__ import annotations

import heapq
import json
import logging
import os
import shutil
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .docfilter import DocumentFilter, FilterConfig, FilterStats, ScoredDocument, rank_key
from .lexicon import Lexicon
from .lines import DEFAULT_MIN_LINE_LEN, RankedLine, iter_clustered, rank_lines
from .scoring import Matcher, ScoreConfig, tokenize
from .secondpass import SecondPassConfig, load_candidates, refine
from .vocab import IndexWriter
from .warc import IngestStats, read_wet_stream

logger = logging.getLogger(__name__)

TMPDIR_ENV = "MINE_TMPDIR"
MANIFEST = "manifest.json"
PARTIAL_MARKER = "_PARTIAL"


class JobError(RuntimeError):
    pass


@dataclass
class JobConfig:
    input_paths: list[Path]
    output_dir: Path
    filter: FilterConfig
    shard_count: int = 1
    emit_lines: bool = False
    dedup_lines: bool = False
    min_line_len: int = DEFAULT_MIN_LINE_LEN
    index_dir: Path | None = None
    stats_interval: int = 100_000

    def __post_init__(self):
        self.input_paths = [Path(p) for p in self.input_paths]
        self.output_dir = Path(self.output_dir)
        if self.index_dir is not None:
            self.index_dir = Path(self.index_dir)
        if self.shard_count < 1:
            raise ValueError("shard_count must be >= 1")
        if not self.input_paths:
            raise ValueError("no input paths given")

    @property
    def score(self) -> ScoreConfig:
        return self.filter.score


@dataclass
class RunReport:
    documents_scanned: int = 0
    documents_kept: dict[str, int] = field(default_factory=dict)
    documents_kept_total: int = 0
    bytes_scanned: int = 0
    wall_time: float = 0.0
    cores: int = 1
    docs_per_core_second: float = 0.0
    rejection_breakdown: dict[str, int] = field(default_factory=dict)
    files: int = 0
    files_skipped: list[str] = field(default_factory=list)
    decode_replacements: int = 0
    blacklist_evaluations: int = 0

    @property
    def bytes_per_core_second(self) -> float:
        return self.bytes_scanned / (self.cores * self.wall_time) if self.wall_time else 0.0


def expand_inputs(paths: Sequence[str | Path]) -> list[Path]:
    """Files as given, directories expanded to their sorted non-hidden files."""
    out: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(
                sorted(f for f in p.rglob("*") if f.is_file() and not f.name.startswith("."))
            )
        else:
            out.append(p)
    return out


@dataclass
class _ShardTask:
    source: int
    path: Path
    config: FilterConfig
    run_dir: Path
    index_dir: Path | None
    emit_lines: bool
    min_line_len: int
    stats_interval: int


@dataclass
class _ShardResult:
    source: int
    path: str
    ingest: IngestStats
    filtering: FilterStats
    kept: dict[str, int]
    skipped: str | None = None


def _run_path(run_dir: Path, source: int, lang: str, lines: bool = False) -> Path:
    return run_dir / f"{source:06d}.{lang}{'.lines' if lines else ''}.jsonl"


def _process_file(task: _ShardTask) -> _ShardResult:
    cfg = task.config
    langs = cfg.languages
    istats = IngestStats()
    dfilter = DocumentFilter(cfg)
    kept: dict[str, list[ScoredDocument]] = {lang: [] for lang in langs}
    writer = None
    if task.index_dir is not None:
        writer = IndexWriter(
            task.index_dir / f"{task.source:06d}-{task.path.name}.vocab",
            provenance=str(task.path),
            score=cfg.score,
        )
    try:
        fh = open(task.path, "rb")
    except OSError as exc:
        logger.warning("skipping unreadable input %s: %s", task.path, exc)
        return _ShardResult(task.source, str(task.path), istats, dfilter.stats, {}, skipped=str(exc))
    try:
        with fh:
            if writer is not None:
                writer.__enter__()
            n = 0
            for doc in read_wet_stream(fh, istats, source_index=task.source):
                scored = dfilter(doc)
                if writer is not None and (cfg.index_all or scored is not None):
                    writer.add(doc, scored.type_set(cfg.score) if scored is not None else tokenize(doc.text, cfg.score))
                if scored is not None:
                    for lang in langs:
                        if scored.wsc[lang] >= cfg.threshold:
                            kept[lang].append(scored)
                n += 1
                if task.stats_interval and n % task.stats_interval == 0:
                    logger.info("%s: %d documents, %d kept", task.path.name, n, dfilter.stats.kept)
    except OSError as exc:
        if writer is not None:
            writer.__exit__(type(exc), exc, None)
        logger.warning("skipping input %s after read error: %s", task.path, exc)
        return _ShardResult(task.source, str(task.path), IngestStats(), FilterStats(), {}, skipped=str(exc))
    except BaseException as exc:
        if writer is not None:
            writer.__exit__(type(exc), exc, None)
        raise
    if writer is not None:
        writer.__exit__(None, None, None)

    for lang in langs:
        docs = sorted(kept[lang], key=lambda s: rank_key(s, lang))
        with open(_run_path(task.run_dir, task.source, lang), "w", encoding="utf-8") as out:
            for s in docs:
                out.write(json.dumps(s.to_record(), ensure_ascii=False) + "\n")
        if task.emit_lines:
            lex = next(x for x in cfg.targets if x.language_code == lang)
            matcher = Matcher([lex], cfg.score.min_token_len)
            lines: list[RankedLine] = []
            for s in docs:
                lines.extend(rank_lines(s, lex, task.min_line_len, cfg.score, matcher))
            lines.sort(key=RankedLine.sort_key)
            with open(_run_path(task.run_dir, task.source, lang, True), "w", encoding="utf-8") as out:
                for ln in lines:
                    out.write(json.dumps(ln.to_record(), ensure_ascii=False) + "\n")
    return _ShardResult(
        task.source, str(task.path), istats, dfilter.stats, {lang: len(v) for lang, v in kept.items()}
    )


def _read_run(path: Path, key) -> Iterator[tuple[tuple, str]]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            yield key(json.loads(line)), line


def _merge_runs(paths: list[Path], key, out_path: Path) -> int:
    n = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for _, line in heapq.merge(*(_read_run(p, key) for p in paths if p.exists())):
            out.write(line)
            n += 1
    return n


def _doc_key(lang: str):
    return lambda rec: (-rec["wsc"][lang], rec["file"], rec["id"])


def _line_key(rec: dict) -> tuple:
    return (-rec["norm_score"], rec["file"], rec["doc_id"], rec["line_no"])


def _merge_lines(paths: list[Path], out_path: Path, dedup: bool) -> int:
    merged = (RankedLine.from_record(json.loads(line))
              for _, line in heapq.merge(*(_read_run(p, _line_key) for p in paths if p.exists())))
    if dedup:
        merged = iter_clustered(merged)
    n = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for ln in merged:
            out.write(json.dumps(ln.to_record(), ensure_ascii=False) + "\n")
            n += 1
    return n


def _lexicon_meta(lex: Lexicon) -> dict:
    return {"language": lex.language_code, "kind": lex.kind.value, "types": len(lex), "min_type_len": lex.min_type_len}


def run_first_pass(config: JobConfig) -> RunReport:
    """Filter every input file, merge per-language rankings, write a manifest.

    On a hard failure the output directory gets a ``_PARTIAL`` marker and
    :class:`JobError` is raised. Unreadable inputs are skipped and listed
    in the report.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    marker = out / PARTIAL_MARKER
    marker.write_text("first pass in progress\n", encoding="utf-8")
    (out / MANIFEST).unlink(missing_ok=True)
    paths = expand_inputs(config.input_paths)
    if not paths:
        raise JobError("no input files found")
    run_dir = Path(tempfile.mkdtemp(prefix="mine-runs-", dir=os.environ.get(TMPDIR_ENV)))
    tasks = [
        _ShardTask(i, p, config.filter, run_dir, config.index_dir, config.emit_lines,
                   config.min_line_len, config.stats_interval)
        for i, p in enumerate(paths)
    ]
    cores = min(config.shard_count, len(tasks))
    start = time.perf_counter()
    try:
        if cores == 1:
            results = [_process_file(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=cores) as pool:
                results = list(pool.map(_process_file, tasks))
        report = RunReport(files=len(paths), cores=cores)
        for lang in config.filter.languages:
            report.documents_kept[lang] = _merge_runs(
                [_run_path(run_dir, t.source, lang) for t in tasks], _doc_key(lang), out / f"{lang}.jsonl"
            )
            if config.emit_lines:
                _merge_lines(
                    [_run_path(run_dir, t.source, lang, True) for t in tasks],
                    out / f"{lang}.lines.jsonl",
                    config.dedup_lines,
                )
    except Exception as exc:
        marker.write_text(f"first pass aborted: {exc!r}\n", encoding="utf-8")
        raise JobError(f"first pass aborted: {exc}") from exc
    finally:
        shutil.rmtree(run_dir, ignore_errors=True)
    report.wall_time = time.perf_counter() - start

    ingest, filtering = IngestStats(), FilterStats()
    for r in results:
        ingest.merge(r.ingest)
        filtering.merge(r.filtering)
        if r.skipped is not None:
            report.files_skipped.append(r.path)
    report.documents_scanned = ingest.records_read
    report.documents_kept_total = filtering.kept
    report.bytes_scanned = ingest.bytes_read
    report.decode_replacements = ingest.decode_replacements
    report.blacklist_evaluations = filtering.blacklist_evaluations
    report.rejection_breakdown = dict(filtering.rejection_breakdown(), parse_skipped=ingest.records_skipped)
    if report.wall_time > 0:
        report.docs_per_core_second = report.documents_scanned / (cores * report.wall_time)

    manifest = {
        "stage": "first-pass",
        "report": asdict(report),
        "inputs": [str(p) for p in paths],
        "threshold": config.filter.threshold,
        "tolerance": config.filter.tolerance,
        "score": asdict(config.score),
        "targets": [_lexicon_meta(x) for x in config.filter.targets],
        "blacklists": [_lexicon_meta(x) for x in config.filter.blacklists],
        "index_dir": str(config.index_dir) if config.index_dir else None,
        "index_all": config.filter.index_all,
        "emit_lines": config.emit_lines,
        "min_line_len": config.min_line_len,
        "shard_count": config.shard_count,
    }
    with open(out / MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, ensure_ascii=False)
    marker.unlink(missing_ok=True)
    logger.info(
        "first pass: %d documents scanned, %d kept, %.1f docs/core/s",
        report.documents_scanned, report.documents_kept_total, report.docs_per_core_second,
    )
    return report


def read_manifest(directory: str | Path) -> dict:
    directory = Path(directory)
    if (directory / PARTIAL_MARKER).exists():
        raise JobError(f"{directory} holds an incomplete run ({PARTIAL_MARKER} present)")
    path = directory / MANIFEST
    if not path.exists():
        raise FileNotFoundError(f"no {MANIFEST} in {directory}; run the first pass first")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@dataclass
class SecondPassReport:
    target: str
    loading_threshold: int
    loaded: int = 0
    kept: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0


def run_second_pass(in_dir: str | Path, config: SecondPassConfig, out_dir: str | Path) -> SecondPassReport:
    """Refine ``<in_dir>/<target>.jsonl`` into ``<out_dir>``.

    Writes the surviving documents (rank order preserved), an audit log
    with one ``{id, file, reason}`` line per dropped document, and a
    manifest.
    """
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    manifest = read_manifest(in_dir)
    if config.first_pass_threshold is None:
        config = SecondPassConfig(
            target=config.target,
            loading_threshold=config.loading_threshold,
            blocked_crawler_langs=config.blocked_crawler_langs,
            related_targets=config.related_targets,
            blocked_url_patterns=config.blocked_url_patterns,
            order=config.order,
            score=ScoreConfig(**manifest.get("score", {})),
            first_pass_threshold=int(manifest["threshold"]),
        )
    source = in_dir / f"{config.target}.jsonl"
    out_dir.mkdir(parents=True, exist_ok=True)
    report = SecondPassReport(config.target, config.loading_threshold)
    start = time.perf_counter()
    with open(out_dir / f"{config.target}.jsonl", "w", encoding="utf-8") as kept_fh, \
            open(out_dir / f"{config.target}.audit.jsonl", "w", encoding="utf-8") as audit_fh:
        for doc, reason in refine(load_candidates(source, config), config):
            report.loaded += 1
            if reason is None:
                report.kept += 1
                kept_fh.write(json.dumps(doc.to_record(), ensure_ascii=False) + "\n")
            else:
                stage = reason.split(":", 1)[0]
                report.dropped[stage] = report.dropped.get(stage, 0) + 1
                audit_fh.write(json.dumps(
                    {"id": doc.id, "file": doc.document.source, "reason": reason}, ensure_ascii=False
                ) + "\n")
    report.wall_time = time.perf_counter() - start
    with open(out_dir / MANIFEST, "w", encoding="utf-8") as fh:
        json.dump({
            "stage": "second-pass",
            "input": str(source),
            "report": asdict(report),
            "blocked_crawler_langs": sorted(config.blocked_crawler_langs),
            "related_targets": [_lexicon_meta(x) for x in config.related_targets],
            "blocked_url_patterns": list(config.blocked_url_patterns),
            "order": list(config.order),
        }, fh, indent=2, ensure_ascii=False)
    return report
