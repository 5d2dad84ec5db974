"""Lexicon-based language mining over web-crawl WET archives."""

from .docfilter import (
    ConfigError,
    DocumentFilter,
    FilterConfig,
    FilterStats,
    ScoredDocument,
    filter_document,
    filter_documents,
    rank,
    select_language,
)
from .lexicon import Lexicon, LexiconError, LexiconKind, build_lexicon, load_lexicon, overlap_report
from .lines import RankedLine, cluster_duplicates, rank_lines
from .pipeline import JobConfig, JobError, RunReport, run_first_pass, run_second_pass
from .scoring import HAVE_ACCELERATOR, Matcher, ScoreConfig, normalize, score, tokenize
from .secondpass import SecondPassConfig, load_candidates, load_config, refine
from .vocab import IndexFormatError, load_index, replay_index, write_index
from .warc import Document, IngestStats, read_wet_file, read_wet_stream, write_wet_record

__version__ = "0.1.0"
