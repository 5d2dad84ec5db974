from __future__ import annotations

import random

import pytest

from langmine.docfilter import FilterConfig, filter_documents
from langmine.scoring import ScoreConfig, score, tokenize
from langmine.vocab import (
    IndexFormatError,
    IndexWriter,
    is_index_file,
    load_index,
    read_index,
    replay_index,
    write_index,
)
from langmine.warc import Document

from conftest import black, random_text, white

VOCAB = [f"w{i}" for i in range(300)] + ["Mwen", "KA", "palé,", "x y"]


def corpus(n, seed=0):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        text = random_text(rng, VOCAB, n_lines=rng.randint(1, 4))
        out.append(Document(i, f"http://c/{i}?q=\"x\"\t", ("fra", "eng") if i % 3 else None, text,
                            len(text.encode()), 2))
    return out


def index_docs(docs, tmp_path, cfg=ScoreConfig()):
    return write_index(((d, tokenize(d.text, cfg)) for d in docs), tmp_path / "x.vocab", "test", cfg)


def test_empty_index(tmp_path):
    path = write_index([], tmp_path / "e.vocab")
    lines = path.read_text().splitlines()
    assert len(lines) == 2 and lines[0].startswith("#langmine-vocab") and lines[1] == "#end\t0"
    assert len(load_index(path)) == 0


def test_round_trip(tmp_path):
    docs = corpus(3)
    path = index_docs(docs, tmp_path)
    idx = load_index(path)
    assert idx.provenance == "test"
    for d in docs:
        e = idx.entries[d.id]
        assert e.types == tokenize(d.text)
        assert (e.uri, e.crawler_lang, e.byte_len, e.source) == (d.uri, d.crawler_lang, d.byte_len, d.source)


def test_index_score_equals_raw(tmp_path):
    docs = corpus(1000)
    path = index_docs(docs, tmp_path)
    lexicons = [white("a", VOCAB[:50]), white("b", VOCAB[100:250]), black("c", ["mwen", "ka"])]
    idx = load_index(path)
    for d in docs:
        raw = tokenize(d.text)
        for lex in lexicons:
            assert score(idx.entries[d.id].types, lex) == score(raw, lex)


def test_replay_examples(tmp_path):
    docs = corpus(400)
    path = index_docs(docs, tmp_path)
    base = FilterConfig((white("a", VOCAB[:60]),), (black("b", VOCAB[280:300]),), threshold=2, tolerance=2)
    direct = set(filter_documents(docs, base))
    assert set(replay_index(path, base)) == direct
    higher = set(replay_index(path, base.replace(threshold=4)))
    assert higher <= direct
    for t in range(1, 16):
        cfg = base.replace(threshold=t)
        assert len(replay_index(path, cfg)) == len(filter_documents(docs, cfg))


def test_replay_refuses_other_tokenization(tmp_path):
    path = index_docs(corpus(5), tmp_path)
    cfg = FilterConfig((white("a", VOCAB[:10]),), score=ScoreConfig(punct_normalize=True))
    with pytest.raises(IndexFormatError):
        replay_index(path, cfg)


def test_partial_index_is_refused(tmp_path):
    path = tmp_path / "p.vocab"
    with pytest.raises(RuntimeError):
        with IndexWriter(path) as w:
            w.add(corpus(1)[0], {"a"})
            raise RuntimeError("shard crashed")
    assert not path.exists()
    assert (tmp_path / "p.vocab.partial").exists()
    with pytest.raises(IndexFormatError, match="partial"):
        read_index(path)


def test_truncated_and_bad_footer(tmp_path):
    path = index_docs(corpus(10), tmp_path)
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:-1]))
    with pytest.raises(IndexFormatError, match="truncated"):
        load_index(path)
    path.write_text("".join(lines[:-2]) + "#end\t10\n")
    with pytest.raises(IndexFormatError, match="footer"):
        load_index(path)


def test_version_and_magic(tmp_path):
    p = tmp_path / "v.vocab"
    p.write_text("#langmine-vocab\t99\t{}\n#end\t0\n")
    with pytest.raises(IndexFormatError, match="version"):
        read_index(p)
    q = tmp_path / "q.txt"
    q.write_text("hello\n")
    assert not is_index_file(q)
    with pytest.raises(IndexFormatError):
        read_index(q)
