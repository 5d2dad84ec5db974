"""Command line entry point: ``mine first-pass | second-pass | bench | replay``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import bench
from .docfilter import DEFAULT_THRESHOLD, DEFAULT_TOLERANCE, ConfigError, FilterConfig, FilterStats, rank
from .lexicon import DEFAULT_MIN_TYPE_LEN, LexiconError, load_lexicon
from .pipeline import JobConfig, JobError, run_first_pass, run_second_pass
from .scoring import ScoreConfig
from .secondpass import load_config
from .vocab import IndexFormatError, replay_index

log = logging.getLogger("langmine")


def _wordlist_arg(value: str) -> tuple[str | None, Path]:
    code, sep, path = value.partition("=")
    if not sep:
        return None, Path(value)
    if not code:
        raise argparse.ArgumentTypeError(f"empty language code in {value!r}")
    return code, Path(path)


def _thresholds_arg(value: str) -> tuple[int, ...]:
    try:
        out = tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {value!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("thresholds must be positive integers")
    return out


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _add_scoring_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--wordlist", action="append", type=_wordlist_arg, default=[], metavar="LANG=PATH",
                   help="target whitelist; repeat for several languages (LANG defaults to the file stem)")
    p.add_argument("--blacklist", action="append", type=Path, default=[], metavar="PATH")
    p.add_argument("--threshold", type=_positive, default=DEFAULT_THRESHOLD)
    p.add_argument("--tolerance", type=_positive, default=DEFAULT_TOLERANCE)
    p.add_argument("--min-type-len", type=_positive, default=DEFAULT_MIN_TYPE_LEN)
    p.add_argument("--normalize-punct", action="store_true", help="map punctuation to spaces before tokenizing")


def _filter_config(args) -> FilterConfig:
    if not args.wordlist:
        raise ConfigError("at least one --wordlist is required")
    targets = tuple(load_lexicon(p, "whitelist", args.min_type_len, language_code=code) for code, p in args.wordlist)
    blacklists = tuple(load_lexicon(p, "blacklist", args.min_type_len) for p in args.blacklist)
    return FilterConfig(
        targets, blacklists, args.threshold, args.tolerance,
        index_all=getattr(args, "index_all", False),
        score=ScoreConfig(punct_normalize=args.normalize_punct),
    )


def cmd_first_pass(args) -> int:
    job = JobConfig(
        input_paths=args.input,
        output_dir=args.out,
        filter=_filter_config(args),
        shard_count=args.shards,
        emit_lines=args.emit_lines or args.dedup_lines,
        dedup_lines=args.dedup_lines,
        min_line_len=args.min_line_len,
        index_dir=args.index_out,
        stats_interval=args.stats_interval,
    )
    report = run_first_pass(job)
    print(json.dumps(asdict(report), indent=2))
    return 0


def cmd_second_pass(args) -> int:
    overrides = {}
    if args.loading_threshold is not None:
        overrides["loading_threshold"] = args.loading_threshold
    config = load_config(args.config, **overrides)
    report = run_second_pass(args.in_dir, config, args.out)
    print(json.dumps(asdict(report), indent=2))
    return 0


def cmd_bench(args) -> int:
    manifest: dict = {"thresholds": list(args.thresholds), "seed": args.seed}
    if args.synthetic:
        syn = bench.synthetic_benchmark(seed=args.seed, skip_word=args.skip_word)
        corpus = syn.corpus
        lexicons = [syn.whitelist]
        blacklists = []
        manifest["source"] = "synthetic"
        manifest["expected"] = {t: syn.schedule.expected(t) for t in args.thresholds}
    else:
        if not (args.needles and args.hay and args.wordlist):
            raise ConfigError("--needles, --hay and --wordlist are required unless --synthetic is given")
        corpus = bench.build_benchmark(
            bench.load_text_source(args.needles), bench.load_text_source(args.hay),
            args.needle_count, args.hay_count, args.skip_word, args.seed,
        )
        lexicons = [load_lexicon(p, "whitelist", args.min_type_len, language_code=code) for code, p in args.wordlist]
        blacklists = [load_lexicon(p, "blacklist", args.min_type_len) for p in args.blacklist]
        manifest.update(needles=str(args.needles), hay=str(args.hay), excluded_hay=corpus.excluded_hay)
    if args.corpus_out:
        bench.write_corpus(corpus, args.corpus_out)
    results = bench.run_benchmark(
        corpus, lexicons, args.thresholds, blacklists, args.tolerance,
        ScoreConfig(punct_normalize=args.normalize_punct), args.target,
    )
    manifest.update(
        skip_word=args.skip_word, needle_count=corpus.needle_count, hay_count=corpus.hay_count,
        target=args.target or lexicons[0].language_code,
        lexicons={lex.language_code: len(lex) for lex in lexicons},
    )
    bench.write_results(results, args.out, manifest)
    for r in results:
        print(f"threshold={r.threshold:>3}  recall={r.recall_pct:6.2f}%  fpr={r.fpr_pct:6.3f}%  "
              f"tp={r.true_positives} fp={r.false_positives}  {r.wall_time:.3f}s")
    return 0


def cmd_replay(args) -> int:
    config = _filter_config(args)
    stats = FilterStats()
    kept = []
    for path in args.index:
        kept.extend(replay_index(path, config, stats))
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for lang in config.languages:
            for s in rank([k for k in kept if k.wsc[lang] >= config.threshold], lang):
                rec = s.to_record()
                del rec["text"]
                rec["language"] = lang
                out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    log.info("replay: %d indexed documents, %d kept", stats.documents, stats.kept)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mine", description="Lexicon-based language mining over WET archives.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("first-pass", help="filter WET files into ranked per-language corpora")
    p.add_argument("--input", nargs="+", required=True, type=Path, help="WET files or directories")
    _add_scoring_args(p)
    p.add_argument("--index-out", type=Path, help="write vocabulary indices here")
    p.add_argument("--index-all", action="store_true", help="index every document, not only kept ones")
    p.add_argument("--emit-lines", action="store_true", help="also write ranked lines per language")
    p.add_argument("--dedup-lines", action="store_true", help="cluster duplicate lines (implies --emit-lines)")
    p.add_argument("--min-line-len", type=int, default=15)
    p.add_argument("--shards", type=_positive, default=1, help="worker processes")
    p.add_argument("--stats-interval", type=int, default=100_000)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_first_pass)

    p = sub.add_parser("second-pass", help="refine one language of a first-pass output")
    p.add_argument("--in", dest="in_dir", type=Path, required=True)
    p.add_argument("--config", type=Path, required=True, help="YAML second-pass config")
    p.add_argument("--loading-threshold", type=_positive)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_second_pass)

    p = sub.add_parser("bench", help="needle/hay threshold sweep")
    p.add_argument("--needles", type=Path)
    p.add_argument("--hay", type=Path)
    _add_scoring_args(p)
    p.add_argument("--target", help="language evaluated (default: first wordlist)")
    p.add_argument("--thresholds", type=_thresholds_arg, default=bench.DEFAULT_THRESHOLDS)
    p.add_argument("--needle-count", type=_positive, default=200)
    p.add_argument("--hay-count", type=_positive, default=9800)
    p.add_argument("--skip-word", default="créole", help="hay containing this word is excluded ('' disables)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synthetic", action="store_true", help="use the planted synthetic corpus")
    p.add_argument("--corpus-out", type=Path, help="save the sampled corpus as JSONL")
    p.add_argument("--out", type=Path, required=True, help="results CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-filter vocabulary indices with new settings")
    p.add_argument("--index", nargs="+", type=Path, required=True)
    _add_scoring_args(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if getattr(args, "skip_word", None) == "":
        args.skip_word = None
    try:
        return args.func(args)
    except (ConfigError, LexiconError, IndexFormatError, JobError, bench.BenchmarkError, FileNotFoundError) as exc:
        print(f"mine: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
