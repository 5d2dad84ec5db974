from __future__ import annotations

import io
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from langmine import warc
from langmine.warc import IngestStats, read_wet_file, read_wet_stream, write_wet_record

from conftest import make_wet


def split_records(data: bytes) -> list[tuple[dict, bytes]]:
    """Independent reference splitter for well-formed files."""
    out = []
    pos = 0
    head_re = re.compile(rb"WARC/1\.0\r?\n(.*?)\r?\n\r?\n", re.S)
    while True:
        m = head_re.search(data, pos)
        if m is None:
            return out
        headers = {}
        for line in m.group(1).splitlines():
            name, _, value = line.partition(b":")
            headers[name.strip().lower().decode()] = value.strip().decode()
        n = int(headers["content-length"])
        out.append((headers, data[m.end():m.end() + n]))
        pos = m.end() + n


def docs(data: bytes, stats=None):
    return list(read_wet_stream(io.BytesIO(data), stats))


def test_golden_three_records(golden_wet):
    data = golden_wet.read_bytes()
    ref = split_records(data)
    assert len(ref) == 3
    out = list(read_wet_file(golden_wet))
    assert [d.text.encode() for d in out] == [body for _, body in ref]
    assert [d.byte_len for d in out] == [len(body) for _, body in ref]
    assert [d.uri for d in out] == ["http://a.example/1", "http://b.example/2", "http://c.example/3"]
    assert out[0].crawler_lang == ("fra",)
    assert out[1].crawler_lang == ("fra", "eng")
    assert out[2].crawler_lang is None


def test_warcinfo_is_skipped():
    stats = IngestStats()
    out = docs(make_wet([{"body": "x: y", "record_type": "warcinfo"}, ("hello", "u", None)]), stats)
    assert len(out) == 1
    assert stats.records_read == 2 and stats.records_skipped == 1
    assert stats.records_read == len(out) + stats.records_skipped


def test_empty_body():
    (d,) = docs(make_wet([("", "http://e/", None)]))
    assert d.text == "" and d.byte_len == 0


def test_header_names_case_insensitive():
    data = (b"WARC/1.0\r\nwarc-type: Conversion\r\nWARC-TARGET-URI: http://x/\r\n"
            b"content-length: 3\r\n\r\nabc\r\n\r\n")
    (d,) = docs(data)
    assert d.text == "abc" and d.uri == "http://x/"


def test_lf_only_framing():
    data = (b"WARC/1.0\nWARC-Type: conversion\nContent-Length: 5\n\nab\ncd\n\n"
            b"WARC/1.0\nWARC-Type: conversion\nContent-Length: 1\n\nz\n\n")
    assert [d.text for d in docs(data)] == ["ab\ncd", "z"]


def test_corrupted_record_between_valid_ones():
    good1 = make_wet([("first document", "http://1/", None)])
    good2 = make_wet([("second document", "http://2/", None)])
    for bad in (
        b"WARC/1.0\r\nWARC-Type: conversion\r\nContent-Length: banana\r\n\r\nxxx\r\n\r\n",
        b"garbage line\r\nmore garbage\r\n\r\n",
        b"WARC/1.0\r\nWARC-Type: conversion\r\nContent-Length: 9999\r\n\r\nshort\r\n\r\n",
        b"WARC/1.0\r\nWARC-Type: conversion\r\nContent-Length: 2\r\n\r\nlonger than two\r\n\r\n",
    ):
        stats = IngestStats()
        out = docs(good1 + bad + good2, stats)
        assert [d.text for d in out] == ["first document", "second document"], bad
        assert stats.malformed == 1 and stats.records_skipped == 1
        assert [d.id for d in out] == [0, 1]


def test_truncated_final_record():
    data = make_wet([("complete", "u", None), ("this body is cut", "v", None)])
    stats = IngestStats()
    out = docs(data[:-10], stats)
    assert [d.text for d in out] == ["complete"]
    assert stats.truncated == 1


def test_decode_replacements_counted():
    body = b"caf\xe9 ok \xff\xfe and a real \xef\xbf\xbd"
    stats = IngestStats()
    (d,) = docs(make_wet([{"body": body, "uri": "u"}]), stats)
    assert d.byte_len == len(body)
    assert d.text.count("�") == 4
    assert stats.decode_replacements == 3


def test_ids_strictly_increasing_and_source(tmp_path):
    data = make_wet([(f"doc {i}", f"u{i}", None) for i in range(50)])
    out = list(read_wet_stream(io.BytesIO(data), start_id=10, source_index=7))
    assert [d.id for d in out] == list(range(10, 60))
    assert {d.source for d in out} == {7}


def test_bytes_read_counts_whole_stream():
    data = make_wet([("a" * 100, "u", None)] * 5)
    stats = IngestStats()
    docs(data, stats)
    assert stats.bytes_read == len(data)


def test_write_record_round_trip():
    buf = io.BytesIO()
    n = write_wet_record(buf, "žluťoučký kůň".encode(), uri="http://cz/", langs="ces")
    assert n == len(buf.getvalue())
    (d,) = docs(buf.getvalue())
    assert d.text == "žluťoučký kůň" and d.crawler_lang == ("ces",)


bodies = st.lists(
    st.one_of(
        st.text(max_size=200),
        st.sampled_from(["", "\r\n", "WARC/1.0\r\n", "\nWARC/1.0\n\n", "Content-Length: 5\r\n\r\n"]),
    ),
    max_size=12,
)


@settings(max_examples=150, deadline=None)
@given(bodies, st.sampled_from([7, 64, 1 << 20]))
def test_round_trip_property(texts, chunk):
    data = make_wet([(t, f"http://h/{i}", "eng") for i, t in enumerate(texts)])
    old = warc.CHUNK_SIZE
    warc.CHUNK_SIZE = chunk
    try:
        stats = IngestStats()
        out = docs(data, stats)
    finally:
        warc.CHUNK_SIZE = old
    assert [d.text for d in out] == texts
    assert [d.uri for d in out] == [f"http://h/{i}" for i in range(len(texts))]
    assert [d.byte_len for d in out] == [len(t.encode()) for t in texts]
    assert stats.records_read == len(out) and stats.bytes_read == len(data)
    assert [body for _, body in split_records(data)] == [t.encode() for t in texts]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.text(alphabet="abc \n", max_size=40), min_size=2, max_size=6), st.data())
def test_resilience_property(texts, data):
    """Corrupting one record's length loses that record only."""
    recs = [make_wet([(t, f"u{i}", None)]) for i, t in enumerate(texts)]
    k = data.draw(st.integers(0, len(texts) - 1))
    recs[k] = recs[k].replace(b"Content-Length: ", b"Content-Length: x", 1)
    stats = IngestStats()
    out = docs(b"".join(recs), stats)
    assert [d.text for d in out] == texts[:k] + texts[k + 1:]
    assert stats.records_skipped == 1


def test_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        list(read_wet_file(tmp_path / "missing.wet"))


fragments = st.lists(
    st.one_of(
        st.sampled_from([
            b"WARC/1.0\r\n", b"WARC/1.0\n", b"WARC-Type: conversion\r\n", b"warc-type:  CONVERSION \n",
            b"WARC-Type: warcinfo\r\n", b"Content-Length: 5\r\n", b"content-length:0\n", b"Content-Length: 12x\r\n",
            b"Content-Length: 1234567890123\r\n", b"WARC-Target-URI: http://a/\r\n",
            b"WARC-Identified-Content-Language: fra,eng\r\n", b"\r\n", b"\n", b"\r\n\r\n", b"\n\n", b"hello",
            b"\nWARC/", b"Content-Length : 3\r\n", b"\xc3\xa9\xff",
        ]),
        st.binary(max_size=12),
    ),
    max_size=25,
)


@pytest.mark.skipif(warc._fast_scan is None, reason="compiled scanner not built")
@settings(max_examples=1500, deadline=None)
@given(fragments, st.integers(0, 40), st.booleans(), st.integers(0, 64))
def test_compiled_scanner_matches_reference(parts, pos, eof, max_header):
    buf = b"".join(parts)
    pos = min(pos, len(buf))
    assert warc._fast_scan(buf, pos, eof, max_header) == warc.scan_record(buf, pos, eof, max_header)


@settings(max_examples=200, deadline=None)
@given(fragments, st.sampled_from([3, 16, 1 << 20]))
def test_stream_same_with_and_without_accelerator(parts, chunk):
    data = b"".join(parts)
    old = warc.CHUNK_SIZE
    warc.CHUNK_SIZE = chunk
    try:
        runs = []
        for accelerate in (False, True):
            stats = IngestStats()
            out = list(read_wet_stream(io.BytesIO(data), stats, accelerate=accelerate))
            runs.append(([(d.text, d.uri, d.crawler_lang, d.byte_len) for d in out], stats))
    finally:
        warc.CHUNK_SIZE = old
    assert runs[0] == runs[1]
    stats = runs[0][1]
    assert stats.records_read == len(runs[0][0]) + stats.records_skipped
