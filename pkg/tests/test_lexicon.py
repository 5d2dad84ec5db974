from __future__ import annotations

import random
import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from langmine.lexicon import (
    Lexicon,
    LexiconError,
    LexiconKind,
    build_lexicon,
    load_lexicon,
    overlap_report,
    save_lexicon,
)


def write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def test_short_types_rejected(tmp_path):
    lex = load_lexicon(write(tmp_path, "gcr.txt", ["piti", "ka", "lapli"]), "whitelist", 3)
    assert lex.types == {"piti", "lapli"}
    assert lex.rejected_short == 1
    assert lex.language_code == "gcr" and lex.kind is LexiconKind.WHITELIST


def test_case_fold_collapse(tmp_path):
    lex = load_lexicon(write(tmp_path, "x.txt", ["Piti", "piti"]), "whitelist", 1)
    assert lex.types == {"piti"}


def test_thousand_unique_words(tmp_path):
    rng = random.Random(3)
    words = set()
    while len(words) < 1000:
        words.add("".join(rng.choices(string.ascii_lowercase, k=rng.randint(1, 9))))
    path = write(tmp_path, "r.txt", sorted(words))
    oracle = {ln.strip() for ln in path.read_text().splitlines() if ln.strip()}
    lex = load_lexicon(path, "whitelist", 1)
    assert len(lex) == len(oracle) == 1000


def test_comments_blank_and_multiword(tmp_path):
    lex = load_lexicon(write(tmp_path, "c.txt", ["# header", "", "  zot  ", "no dey", "mwen"]), "whitelist", 3)
    assert lex.types == {"zot", "mwen"}
    assert lex.rejected_multiword == 1


def test_empty_result_is_an_error(tmp_path):
    with pytest.raises(LexiconError):
        load_lexicon(write(tmp_path, "e.txt", ["# nothing", "ab"]), "whitelist", 3)


def test_unreadable_file(tmp_path):
    with pytest.raises(OSError):
        load_lexicon(tmp_path / "missing.txt")


def test_language_code_override(tmp_path):
    lex = load_lexicon(write(tmp_path, "list.txt", ["abc"]), "blacklist", language_code="fra")
    assert lex.language_code == "fra" and lex.kind is LexiconKind.BLACKLIST


def test_invariants_enforced():
    with pytest.raises(LexiconError):
        Lexicon("x", LexiconKind.WHITELIST, frozenset({"Abc"}))
    with pytest.raises(LexiconError):
        Lexicon("x", LexiconKind.WHITELIST, frozenset({"ab"}), min_type_len=3)
    with pytest.raises(LexiconError):
        Lexicon("x", LexiconKind.WHITELIST, frozenset({"a b"}), min_type_len=1)


def test_overlap_examples():
    a = build_lexicon(["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta1", "theta", "iota", "kappa"], "a")
    b = build_lexicon(["alpha", "beta", "gamma", "lambda", "mu1", "nu1", "xi1", "omicron", "pi1", "rho"], "b")
    assert overlap_report(a, b).count == 3
    assert overlap_report(a, b).sample == ["alpha", "beta", "gamma"]
    assert overlap_report(a, a).count == len(a)
    c = build_lexicon(["sigma"], "c")
    assert overlap_report(a, c) == (0, [])


def test_overlap_sample_capped():
    a = build_lexicon([f"w{i:03d}" for i in range(100)], "a")
    assert len(overlap_report(a, a).sample) == 20


words_st = st.lists(st.text(min_size=0, max_size=8), max_size=60)


@given(words_st)
def test_load_is_idempotent(words):
    try:
        lex = build_lexicon(words, "x", "whitelist", 1)
    except LexiconError:
        return
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "x.txt"
        save_lexicon(lex, p)
        again = load_lexicon(p, "whitelist", 1)
    assert again.types == lex.types


@given(words_st, st.integers(1, 5), st.integers(0, 4))
def test_min_len_monotone(words, n, extra):
    def types(k):
        try:
            return build_lexicon(words, "x", "whitelist", k).types
        except LexiconError:
            return frozenset()

    assert types(n + extra) <= types(n)
