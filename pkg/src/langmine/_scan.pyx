# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``langmine.warc.scan_record``; same inputs, same tuples."""

cdef extern from "string.h":
    void* memmem(const void* haystack, size_t hlen, const void* needle, size_t nlen) nogil

cdef enum:
    REC_OK = 0
    REC_NEED_MORE = 1
    REC_RESYNC = 2
    REC_JUMP = 3
    REC_TRUNCATED = 4
    REC_END = 5


cdef inline Py_ssize_t _find(const unsigned char* s, Py_ssize_t start, Py_ssize_t n,
                             const char* pat, Py_ssize_t m) noexcept nogil:
    cdef const unsigned char* p
    if start < 0:
        start = 0
    if n - start < m:
        return -1
    p = <const unsigned char*>memmem(s + start, n - start, pat, m)
    return -1 if p == NULL else p - s


cdef inline bint _ws(unsigned char c) noexcept nogil:
    return c == 32 or (9 <= c <= 13)


cdef inline bint _name_is(const unsigned char* s, Py_ssize_t i, Py_ssize_t end,
                          const char* name, Py_ssize_t m) noexcept nogil:
    # s[i:i+m] equals name ignoring ASCII case, followed by ':'
    cdef Py_ssize_t k
    cdef unsigned char c
    if end - i <= m:
        return False
    for k in range(m):
        c = s[i + k]
        if 65 <= c <= 90:
            c += 32
        if c != <unsigned char>name[k]:
            return False
    return s[i + m] == 58


cdef inline bint _ieq(const unsigned char* s, Py_ssize_t i, Py_ssize_t j,
                      const char* word, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t k
    cdef unsigned char c
    if j - i != m:
        return False
    for k in range(m):
        c = s[i + k]
        if 65 <= c <= 90:
            c += 32
        if c != <unsigned char>word[k]:
            return False
    return True


def scan_record(bytes buf, Py_ssize_t pos, bint eof, Py_ssize_t max_header=65536):
    cdef const unsigned char* s = buf
    cdef Py_ssize_t n = len(buf)
    cdef Py_ssize_t nl, end, blk_end, ls, le, body_start, body_end, k, size
    cdef bint conversion = False
    cdef const char* term
    cdef Py_ssize_t term_len
    cdef Py_ssize_t t_s = -1, t_e = -1, u_s = -1, u_e = -1, l_s = -1, l_e = -1, c_s = -1, c_e = -1
    while pos < n and (s[pos] == 10 or s[pos] == 13):
        pos += 1
    if pos >= n:
        if eof:
            return (REC_END,)
        return (REC_NEED_MORE, 0)
    if n - pos < 5 and not eof:
        return (REC_NEED_MORE, 0)
    if n - pos < 5 or s[pos] != 87 or s[pos + 1] != 65 or s[pos + 2] != 82 or s[pos + 3] != 67 or s[pos + 4] != 47:
        return (REC_RESYNC, pos)
    end = -1
    term_len = 0
    nl = _find(s, pos, n, b"\n", 1)
    if nl >= 0:
        if s[nl - 1] == 13:
            term, term_len = b"\r\n\r\n", 4
        else:
            term, term_len = b"\n\n", 2
        end = _find(s, pos, n, term, term_len)
    if end < 0:
        if eof:
            return (REC_TRUNCATED,)
        if n - pos > max_header:
            return (REC_RESYNC, pos)
        return (REC_NEED_MORE, 0)
    blk_end = end + term_len // 2

    # header lines: each starts right after a newline inside the block
    ls = nl + 1
    while ls < blk_end:
        le = _find(s, ls, blk_end, b"\n", 1)
        if le < 0:
            le = blk_end
        if c_s < 0 and _name_is(s, ls, le, b"content-length", 14):
            c_s, c_e = ls + 15, le
        elif t_s < 0 and _name_is(s, ls, le, b"warc-type", 9):
            t_s, t_e = ls + 10, le
        elif u_s < 0 and _name_is(s, ls, le, b"warc-target-uri", 15):
            u_s, u_e = ls + 16, le
        elif l_s < 0 and _name_is(s, ls, le, b"warc-identified-content-language", 32):
            l_s, l_e = ls + 33, le
        ls = le + 1

    if c_s < 0:
        return (REC_RESYNC, end)
    while c_s < c_e and _ws(s[c_s]):
        c_s += 1
    while c_e > c_s and _ws(s[c_e - 1]):
        c_e -= 1
    if c_e == c_s or c_e - c_s > 12:
        return (REC_RESYNC, end)
    size = 0
    for k in range(c_s, c_e):
        if not (48 <= s[k] <= 57):
            return (REC_RESYNC, end)
        size = size * 10 + (s[k] - 48)
    body_start = end + term_len
    body_end = body_start + size
    if n <= body_end and not eof:
        return (REC_NEED_MORE, body_end + 1 - n)
    if body_end > n or (body_end < n and s[body_end] != 10 and s[body_end] != 13):
        k = _find(s, body_start - 1, n, b"\nWARC/", 6)
        if k >= 0:
            return (REC_JUMP, k + 1)
        if body_end > n:
            return (REC_TRUNCATED,)
        return (REC_JUMP, body_end)

    if t_s >= 0:
        while t_s < t_e and _ws(s[t_s]):
            t_s += 1
        while t_e > t_s and _ws(s[t_e - 1]):
            t_e -= 1
        conversion = _ieq(s, t_s, t_e, b"conversion", 10)
    uri = None
    if u_s >= 0:
        while u_s < u_e and _ws(s[u_s]):
            u_s += 1
        while u_e > u_s and _ws(s[u_e - 1]):
            u_e -= 1
        uri = buf[u_s:u_e]
    langs = None
    if l_s >= 0:
        while l_s < l_e and _ws(s[l_s]):
            l_s += 1
        while l_e > l_s and _ws(s[l_e - 1]):
            l_e -= 1
        langs = buf[l_s:l_e]
    return (REC_OK, body_start, body_end, conversion, uri, langs)
