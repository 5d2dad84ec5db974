# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Allocation-free multi-lexicon type matching.

Tokens are maximal runs of non-whitespace code points, whitespace being
exactly what ``str.split()`` splits on. Each lexicon entry is matched at
most once per call (generation stamps), which gives type semantics.
"""

cimport cython
from libc.stdint cimport uint16_t, uint32_t, uint64_t, int32_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cdef extern from "Python.h":
    int PyUnicode_KIND(object o)
    void* PyUnicode_DATA(object o)
    Py_ssize_t PyUnicode_GET_LENGTH(object o)
    Py_UCS4 PyUnicode_READ(int kind, void* data, Py_ssize_t index) nogil
    bint Py_UNICODE_ISSPACE(Py_UCS4 ch) nogil

cdef uint64_t FNV_OFFSET = 14695981039346656037ULL
cdef uint64_t FNV_PRIME = 1099511628211ULL


cdef bint[256] _SPACE1
cdef int _c
for _c in range(256):
    _SPACE1[_c] = Py_UNICODE_ISSPACE(<Py_UCS4>_c)

# Case folding for the BMP. _FOLD[c] == 0 (for c != 0) marks a code point
# whose full folding is not a single BMP character (e.g. U+00DF -> "ss").
cdef uint16_t[65536] _FOLD
cdef str _f
for _c in range(65536):
    _f = chr(_c).casefold()
    _FOLD[_c] = ord(_f) if len(_f) == 1 and ord(_f) < 65536 else 0


cdef inline uint64_t _hash_span(int kind, void* data, Py_ssize_t start, Py_ssize_t end) nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(start, end):
        h ^= <uint64_t>PyUnicode_READ(kind, data, i)
        h *= FNV_PRIME
    return h


cdef inline Py_UCS4 _fold1(Py_UCS4 c) noexcept nogil:
    return _FOLD[c]


cdef inline uint64_t _slot(uint64_t h) noexcept nogil:
    h ^= h >> 33
    h *= 0xff51afd7ed558ccdULL
    h ^= h >> 33
    return h


@cython.final
cdef class MatchTable:
    cdef list words
    cdef Py_ssize_t n_words
    cdef Py_ssize_t n_lex
    cdef Py_ssize_t min_len
    cdef uint64_t* hashes
    cdef uint64_t* masks
    cdef Py_ssize_t* lengths
    cdef uint32_t* stamps
    cdef uint32_t gen
    cdef int32_t* slots
    cdef uint64_t slot_mask
    cdef Py_ssize_t* scratch
    cdef int* kinds
    cdef void** datas

    def __cinit__(self, list type_sets, Py_ssize_t min_token_len=1):
        cdef dict index = {}
        cdef Py_ssize_t li, wi, cap
        self.n_lex = len(type_sets)
        if self.n_lex > 64:
            raise ValueError("at most 64 lexicons per table")
        self.min_len = min_token_len
        for li, types in enumerate(type_sets):
            for w in types:
                if w not in index:
                    index[w] = 0
                index[w] = index[w] | (<object>1 << li)  # Python int: bit 63 must not go negative
        self.words = list(index)
        self.n_words = len(self.words)
        cap = 16
        while cap < 2 * self.n_words + 1:
            cap <<= 1
        self.slot_mask = cap - 1
        self.hashes = <uint64_t*>malloc(max(self.n_words, 1) * sizeof(uint64_t))
        self.masks = <uint64_t*>malloc(max(self.n_words, 1) * sizeof(uint64_t))
        self.lengths = <Py_ssize_t*>malloc(max(self.n_words, 1) * sizeof(Py_ssize_t))
        self.stamps = <uint32_t*>malloc(max(self.n_words, 1) * sizeof(uint32_t))
        self.slots = <int32_t*>malloc(cap * sizeof(int32_t))
        self.scratch = <Py_ssize_t*>malloc(max(self.n_lex, 1) * sizeof(Py_ssize_t))
        self.kinds = <int*>malloc(max(self.n_words, 1) * sizeof(int))
        self.datas = <void**>malloc(max(self.n_words, 1) * sizeof(void*))
        if not (self.kinds and self.datas and self.hashes and self.masks and self.lengths and self.stamps and self.slots and self.scratch):
            raise MemoryError()
        memset(self.slots, 0xFF, cap * sizeof(int32_t))
        memset(self.stamps, 0, max(self.n_words, 1) * sizeof(uint32_t))
        self.gen = 0
        cdef uint64_t h, pos
        for wi in range(self.n_words):
            w = self.words[wi]
            h = _hash_span(PyUnicode_KIND(w), PyUnicode_DATA(w), 0, PyUnicode_GET_LENGTH(w))
            self.hashes[wi] = h
            self.masks[wi] = <uint64_t>index[w]
            self.lengths[wi] = PyUnicode_GET_LENGTH(w)
            self.kinds[wi] = PyUnicode_KIND(w)
            self.datas[wi] = PyUnicode_DATA(w)
            pos = _slot(h) & self.slot_mask
            while self.slots[pos] != -1:
                pos = (pos + 1) & self.slot_mask
            self.slots[pos] = <int32_t>wi

    def __dealloc__(self):
        free(self.hashes)
        free(self.masks)
        free(self.lengths)
        free(self.stamps)
        free(self.slots)
        free(self.scratch)
        free(self.kinds)
        free(self.datas)

    cdef inline void _hit(self, Py_ssize_t wi) noexcept nogil:
        cdef uint64_t m
        cdef Py_ssize_t li = 0
        if self.stamps[wi] == self.gen:
            return
        self.stamps[wi] = self.gen
        m = self.masks[wi]
        while m:
            if m & 1:
                self.scratch[li] += 1
            m >>= 1
            li += 1

    cdef inline Py_ssize_t _probe(self, uint64_t h, int kind, void* data, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
        cdef uint64_t pos = _slot(h) & self.slot_mask
        cdef int32_t wi
        cdef Py_ssize_t n = end - start, k
        cdef int wkind
        cdef void* wdata
        while True:
            wi = self.slots[pos]
            if wi == -1:
                return -1
            if self.hashes[wi] == h and self.lengths[wi] == n:
                wkind = self.kinds[wi]
                wdata = self.datas[wi]
                for k in range(n):
                    if PyUnicode_READ(wkind, wdata, k) != PyUnicode_READ(kind, data, start + k):
                        break
                else:
                    return wi
            pos = (pos + 1) & self.slot_mask

    cdef inline Py_ssize_t _probe_folded(self, uint64_t h, int kind, void* data, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
        cdef uint64_t pos = _slot(h) & self.slot_mask
        cdef int32_t wi
        cdef Py_ssize_t n = end - start, k
        cdef int wkind
        cdef void* wdata
        while True:
            wi = self.slots[pos]
            if wi == -1:
                return -1
            if self.hashes[wi] == h and self.lengths[wi] == n:
                wkind = self.kinds[wi]
                wdata = self.datas[wi]
                for k in range(n):
                    if PyUnicode_READ(wkind, wdata, k) != _fold1(PyUnicode_READ(kind, data, start + k)):
                        break
                else:
                    return wi
            pos = (pos + 1) & self.slot_mask

    cdef inline void _reset(self) noexcept:
        cdef Py_ssize_t li
        for li in range(self.n_lex):
            self.scratch[li] = 0
        self.gen += 1
        if self.gen == 0:
            memset(self.stamps, 0, max(self.n_words, 1) * sizeof(uint32_t))
            self.gen = 1

    def counts_unfolded(self, str text):
        """Like ``counts(text.casefold())`` but folds on the fly.

        Returns None when ``text`` holds a character whose case folding is
        not a single BMP character; the caller then folds in Python.
        """
        cdef int kind = PyUnicode_KIND(text)
        cdef void* data = PyUnicode_DATA(text)
        cdef Py_ssize_t n = PyUnicode_GET_LENGTH(text)
        cdef Py_ssize_t i = 0, start, wi, li
        cdef Py_UCS4 c
        cdef uint16_t f
        cdef uint64_t h
        cdef const unsigned char* b
        if kind == 4:
            return None
        self._reset()
        if kind == 1:
            b = <const unsigned char*>data
            while i < n:
                while i < n and _SPACE1[b[i]]:
                    i += 1
                start = i
                h = FNV_OFFSET
                while i < n and not _SPACE1[b[i]]:
                    f = _FOLD[b[i]]
                    if f == 0 and b[i] != 0:
                        return None
                    h = (h ^ f) * FNV_PRIME
                    i += 1
                if i == start or i - start < self.min_len:
                    continue
                wi = self._probe_folded(h, kind, data, start, i)
                if wi >= 0:
                    self._hit(wi)
            return [self.scratch[li] for li in range(self.n_lex)]
        while i < n:
            while i < n and Py_UNICODE_ISSPACE(PyUnicode_READ(kind, data, i)):
                i += 1
            start = i
            h = FNV_OFFSET
            while i < n:
                c = PyUnicode_READ(kind, data, i)
                f = _FOLD[c]
                if f == 0 and c != 0:
                    return None
                if Py_UNICODE_ISSPACE(c):
                    break
                h = (h ^ f) * FNV_PRIME
                i += 1
            if i == start or i - start < self.min_len:
                continue
            wi = self._probe_folded(h, kind, data, start, i)
            if wi >= 0:
                self._hit(wi)
        return [self.scratch[li] for li in range(self.n_lex)]

    def counts(self, str text):
        """Per-lexicon number of distinct entries occurring as tokens of ``text``."""
        cdef int kind = PyUnicode_KIND(text)
        cdef void* data = PyUnicode_DATA(text)
        cdef Py_ssize_t n = PyUnicode_GET_LENGTH(text)
        cdef Py_ssize_t i = 0, start, wi, li
        self._reset()
        cdef const unsigned char* b
        cdef uint64_t h
        if kind == 1:
            b = <const unsigned char*>data
            while i < n:
                while i < n and _SPACE1[b[i]]:
                    i += 1
                start = i
                h = FNV_OFFSET
                while i < n and not _SPACE1[b[i]]:
                    h = (h ^ b[i]) * FNV_PRIME
                    i += 1
                if i == start or i - start < self.min_len:
                    continue
                wi = self._probe(h, kind, data, start, i)
                if wi >= 0:
                    self._hit(wi)
        else:
            while i < n:
                while i < n and Py_UNICODE_ISSPACE(PyUnicode_READ(kind, data, i)):
                    i += 1
                start = i
                while i < n and not Py_UNICODE_ISSPACE(PyUnicode_READ(kind, data, i)):
                    i += 1
                if i == start or i - start < self.min_len:
                    continue
                wi = self._probe(_hash_span(kind, data, start, i), kind, data, start, i)
                if wi >= 0:
                    self._hit(wi)
        return [self.scratch[li] for li in range(self.n_lex)]
