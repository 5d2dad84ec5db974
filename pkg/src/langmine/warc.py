"""Streaming reader for WARC/1.0 WET files.

Only ``conversion`` records become documents. The reader never aborts a
shard on bad input: a malformed record is skipped by resynchronising on
the next line that starts with ``WARC/``, and a truncated final record is
counted and dropped. Input must already be decompressed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import BinaryIO, Iterator

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 20
MAX_HEADER_BYTES = 1 << 16

_VERSION = b"WARC/"
_RESYNC = b"\nWARC/"
_UTF8_REPLACEMENT = "\ufffd".encode()


@dataclass(slots=True)
class Document:
    id: int
    uri: str
    crawler_lang: tuple[str, ...] | None
    text: str
    byte_len: int
    source: int = 0  # ordinal of the input file within a job

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.source, self.id)


@dataclass
class IngestStats:
    records_read: int = 0
    records_skipped: int = 0
    decode_replacements: int = 0
    bytes_read: int = 0
    malformed: int = 0
    truncated: int = 0

    @property
    def documents(self) -> int:
        return self.records_read - self.records_skipped

    def merge(self, other: IngestStats) -> None:
        self.records_read += other.records_read
        self.records_skipped += other.records_skipped
        self.decode_replacements += other.decode_replacements
        self.bytes_read += other.bytes_read
        self.malformed += other.malformed
        self.truncated += other.truncated


# scan_record result codes
REC_OK = 0          # (code, body_start, body_end, is_conversion, uri, langs)
REC_NEED_MORE = 1   # (code, extra bytes wanted)
REC_RESYNC = 2      # malformed; (code, offset to resync from)
REC_JUMP = 3        # malformed; (code, offset of the next record)
REC_TRUNCATED = 4
REC_END = 5


def _header(block: bytes, lowered: bytes, name: bytes) -> bytes | None:
    # name is lower-case and includes the leading newline and trailing colon
    i = lowered.find(name)
    if i < 0:
        return None
    j = lowered.find(b"\n", i + 1)
    return block[i + len(name):j].strip()


def scan_record(buf: bytes, pos: int, eof: bool, max_header: int = MAX_HEADER_BYTES) -> tuple:
    """Locate the record starting at or after ``pos`` in ``buf``.

    Pure-Python reference for the compiled ``langmine._scan.scan_record``;
    both return the same tuples (see the ``REC_*`` codes).
    """
    n = len(buf)
    while pos < n and buf[pos] in (10, 13):
        pos += 1
    if pos >= n:
        return (REC_END,) if eof else (REC_NEED_MORE, 0)
    if n - pos < len(_VERSION) and not eof:
        return (REC_NEED_MORE, 0)
    if not buf.startswith(_VERSION, pos):
        return (REC_RESYNC, pos)
    end = -1
    term = b""
    nl = buf.find(b"\n", pos)
    if nl >= 0:
        term = b"\r\n\r\n" if buf[nl - 1] == 13 else b"\n\n"
        end = buf.find(term, pos)
    if end < 0:
        if eof:
            return (REC_TRUNCATED,)
        if n - pos > max_header:
            return (REC_RESYNC, pos)
        return (REC_NEED_MORE, 0)
    block = buf[pos:end + len(term) // 2]
    lowered = block.lower()
    length = _header(block, lowered, b"\ncontent-length:")
    if length is None or not length.isdigit() or len(length) > 12:
        return (REC_RESYNC, end)
    size = int(length)
    body_start = end + len(term)
    body_end = body_start + size
    if n <= body_end and not eof:
        return (REC_NEED_MORE, body_end + 1 - n)
    if body_end > n or (body_end < n and buf[body_end] not in (10, 13)):
        # Content-Length disagrees with the data: if another record
        # starts inside the supposed body, resume there.
        i = buf.find(_RESYNC, body_start - 1)
        if i >= 0:
            return (REC_JUMP, i + 1)
        if body_end > n:
            return (REC_TRUNCATED,)
        return (REC_JUMP, body_end)
    rec_type = _header(block, lowered, b"\nwarc-type:")
    return (
        REC_OK, body_start, body_end,
        rec_type is not None and rec_type.lower() == b"conversion",
        _header(block, lowered, b"\nwarc-target-uri:"),
        _header(block, lowered, b"\nwarc-identified-content-language:"),
    )


try:
    from ._scan import scan_record as _fast_scan
except ImportError:  # pragma: no cover - extension not built
    _fast_scan = None


def _parse_langs(value: bytes | None) -> tuple[str, ...] | None:
    if value is None:
        return None
    return tuple(t.strip() for t in value.decode("ascii", "replace").split(",") if t.strip())


def read_wet_stream(
    source: BinaryIO,
    stats: IngestStats | None = None,
    *,
    start_id: int = 0,
    source_index: int = 0,
    accelerate: bool = True,
) -> Iterator[Document]:
    """Yield one :class:`Document` per ``conversion`` record of ``source``.

    ``stats`` is updated in place as the stream is consumed. Document ids
    count conversion records from ``start_id`` in stream order.
    """
    if stats is None:
        stats = IngestStats()
    scan = _fast_scan if accelerate and _fast_scan is not None else scan_record
    read = source.read
    buf = b""
    pos = 0
    eof = False
    next_id = start_id

    def refill(buf: bytes, pos: int, want: int = 0) -> tuple[bytes, int, bool]:
        more = read(max(want, CHUNK_SIZE))
        stats.bytes_read += len(more)
        return buf[pos:] + more, 0, not more

    def resync(buf: bytes, pos: int, eof: bool) -> tuple[bytes, int, bool]:
        # advance to the next line starting with WARC/ strictly after pos
        while True:
            i = buf.find(_RESYNC, pos)
            if i >= 0:
                return buf, i + 1, eof
            if eof:
                return buf, len(buf), eof
            buf, pos, eof = refill(buf, max(pos, len(buf) - len(_RESYNC)))

    def skip(reason: str) -> None:
        stats.records_read += 1
        stats.records_skipped += 1
        if reason == "truncated":
            stats.truncated += 1
        else:
            stats.malformed += 1
        logger.debug("skipping %s record after document id %d", reason, next_id - 1)

    while True:
        r = scan(buf, pos, eof, MAX_HEADER_BYTES)
        code = r[0]
        if code == REC_OK:
            _, body_start, body_end, is_conversion, uri, langs = r
            stats.records_read += 1
            pos = body_end
            if not is_conversion:
                stats.records_skipped += 1
                continue
            body = buf[body_start:body_end]
            try:
                text = body.decode("utf-8")
            except UnicodeDecodeError:
                text = body.decode("utf-8", "replace")
                stats.decode_replacements += text.count("\ufffd") - body.count(_UTF8_REPLACEMENT)
            yield Document(
                next_id,
                uri.decode("utf-8", "replace") if uri is not None else "",
                _parse_langs(langs) if langs is not None else None,
                text,
                body_end - body_start,
                source_index,
            )
            next_id += 1
        elif code == REC_NEED_MORE:
            buf, pos, eof = refill(buf, pos, r[1])
        elif code == REC_RESYNC:
            skip("malformed")
            buf, pos, eof = resync(buf, r[1], eof)
        elif code == REC_JUMP:
            skip("malformed")
            pos = r[1]
        elif code == REC_TRUNCATED:
            skip("truncated")
            return
        else:
            return


def read_wet_file(
    path, stats: IngestStats | None = None, *, source_index: int = 0
) -> Iterator[Document]:
    with open(path, "rb") as fh:
        yield from read_wet_stream(fh, stats, source_index=source_index)


def write_wet_record(
    out: BinaryIO,
    body: bytes,
    *,
    uri: str = "",
    record_type: str = "conversion",
    langs: str | None = None,
    record_id: str | None = None,
) -> int:
    """Write one WARC/1.0 record with CRLF framing; returns bytes written."""
    headers = [b"WARC/1.0", b"WARC-Type: " + record_type.encode()]
    if uri:
        headers.append(b"WARC-Target-URI: " + uri.encode())
    if record_id:
        headers.append(b"WARC-Record-ID: <" + record_id.encode() + b">")
    if langs is not None:
        headers.append(b"WARC-Identified-Content-Language: " + langs.encode())
    headers.append(b"Content-Type: text/plain")
    headers.append(b"Content-Length: " + str(len(body)).encode())
    data = b"\r\n".join(headers) + b"\r\n\r\n" + body + b"\r\n\r\n"
    out.write(data)
    return len(data)
