from __future__ import annotations

import io
import random

import pytest

from langmine.lexicon import build_lexicon
from langmine.warc import write_wet_record


def make_wet(records) -> bytes:
    """records: iterable of (body_str, uri, langs) or dicts for write_wet_record."""
    out = io.BytesIO()
    for rec in records:
        if isinstance(rec, dict):
            rec = dict(rec)
            body = rec.pop("body")
            write_wet_record(out, body.encode("utf-8") if isinstance(body, str) else body, **rec)
        else:
            body, uri, langs = rec
            write_wet_record(out, body.encode("utf-8"), uri=uri, langs=langs)
    return out.getvalue()


def white(code, words, min_len=1):
    return build_lexicon(words, code, "whitelist", min_len)


def black(code, words, min_len=1):
    return build_lexicon(words, code, "blacklist", min_len)


def random_text(rng: random.Random, vocab, n_lines=3, words_per_line=(0, 12)) -> str:
    lines = []
    for _ in range(n_lines):
        k = rng.randint(*words_per_line)
        lines.append(" ".join(rng.choice(vocab) for _ in range(k)))
    return "\n".join(lines)


@pytest.fixture
def golden_wet(tmp_path):
    """Three conversion records; only the first is in the toy language."""
    data = make_wet([
        ("mwen ka palé kréyòl\nyo ka fè sa", "http://a.example/1", "fra"),
        ("le chat est sur la table", "http://b.example/2", "fra,eng"),
        ("the quick brown fox", "http://c.example/3", None),
    ])
    path = tmp_path / "golden.wet"
    path.write_bytes(data)
    return path
