from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ordex.textops import (
    ChunkingConfig,
    estimate_tokens,
    ngram_similarity,
    split_overlapping,
    tokenize_words,
)


# -- token estimate ----------------------------------------------------------------


@pytest.mark.parametrize("n, tokens", [(0, 0), (1, 1), (4, 1), (5, 2), (400, 100), (401, 101)])
def test_estimate_tokens(n, tokens):
    assert estimate_tokens("x" * n) == tokens


# -- chunking -----------------------------------------------------------------------


def test_chunking_config_validation():
    with pytest.raises(ValueError):
        ChunkingConfig(0, 0)
    with pytest.raises(ValueError):
        ChunkingConfig(4, 4)
    with pytest.raises(ValueError):
        ChunkingConfig(4, -1)


def test_empty_text_has_no_chunks():
    assert split_overlapping("", ChunkingConfig(10, 2)) == []


def test_short_text_is_one_chunk():
    text = "a short ordinance"
    chunks = split_overlapping(text, ChunkingConfig(100, 10))
    assert len(chunks) == 1 and chunks[0].text == text
    assert (chunks[0].start_offset, chunks[0].end_offset) == (0, len(text))


def sliding_word_windows(n_words: int, width: int, overlap: int) -> list[tuple[int, int]]:
    """1-based inclusive word spans of a plain sliding window that stops once the last word is covered."""
    spans, first = [], 1
    while True:
        last = min(first + width - 1, n_words)
        spans.append((first, last))
        if last == n_words:
            return spans
        first += width - overlap


def word_span(text: str, start: int, end: int) -> tuple[int, int]:
    words_before = len(text[:start].split())
    return words_before + 1, words_before + len(text[start:end].split())


def test_ten_words_four_per_chunk_two_overlap():
    # every word plus its separator is exactly one token (4 chars)
    text = " ".join(f"w{i:02d}" for i in range(10))
    chunks = split_overlapping(text, ChunkingConfig(target_tokens=4, overlap_tokens=2))
    spans = [word_span(text, c.start_offset, c.end_offset) for c in chunks]
    assert spans == sliding_word_windows(10, 4, 2) == [(1, 4), (3, 6), (5, 8), (7, 10)]


def check_chunk_properties(text: str, cfg: ChunkingConfig) -> None:
    chunks = split_overlapping(text, cfg)
    if not text:
        assert chunks == []
        return
    assert chunks[0].start_offset == 0
    assert chunks[-1].end_offset == len(text)
    budget = cfg.target_tokens * 4
    tail = -(-budget // 10)
    for i, c in enumerate(chunks):
        assert c.index == i
        assert c.text == text[c.start_offset:c.end_offset]
        assert c.end_offset > c.start_offset
        assert estimate_tokens(c.text) <= cfg.target_tokens
        if c.end_offset < len(text):
            window = text[max(c.start_offset, c.start_offset + budget - tail):c.start_offset + budget]
            if any(ch.isspace() for ch in window):
                assert text[c.end_offset - 1].isspace()
    for a, b in zip(chunks, chunks[1:]):
        # no gap and forward progress
        assert a.start_offset < b.start_offset <= a.end_offset


texts = st.text(alphabet=st.sampled_from(list("abcde  \n")), max_size=400)
configs = st.integers(1, 40).flatmap(lambda t: st.tuples(st.just(t), st.integers(0, t - 1)))


@settings(max_examples=500)
@given(texts, configs)
def test_chunker_coverage_and_budget(text, cfg_args):
    check_chunk_properties(text, ChunkingConfig(*cfg_args))


@given(texts, texts, configs)
def test_chunk_count_monotone_under_extension(text, extra, cfg_args):
    cfg = ChunkingConfig(*cfg_args)
    assert len(split_overlapping(text + extra, cfg)) >= len(split_overlapping(text, cfg))


def test_overlap_is_roughly_the_requested_size():
    rng = random.Random(3)
    text = " ".join(rng.choice(["setback", "feet", "tower", "road", "a"]) for _ in range(3000))
    cfg = ChunkingConfig(200, 20)
    chunks = split_overlapping(text, cfg)
    for a, b in zip(chunks, chunks[1:]):
        shared = a.end_offset - b.start_offset
        assert 20 * 4 <= shared <= 20 * 4 + 12  # pulled back to the start of a word


# -- n-gram similarity ---------------------------------------------------------------


def test_similarity_matches_oracle_on_random_strings():
    rng = random.Random(2024)
    alphabet = ["a", "b", "c", "d", "e"]
    for _ in range(1000):
        cand = " ".join(rng.choice(alphabet) for _ in range(rng.randint(0, 50)))
        src = " ".join(rng.choice(alphabet) for _ in range(rng.randint(0, 50)))
        n = rng.choice([1, 2, 3])
        assert ngram_similarity(cand, src, n) == oracles.similarity(cand, src, n)


def test_similarity_examples():
    assert ngram_similarity("a b c d", "x a b c y", 2) == 2 / 3
    assert ngram_similarity("the setback is 500 feet", "the setback is 500 feet") == 1.0
    assert ngram_similarity("alpha beta", "gamma delta") == 0.0
    assert ngram_similarity("", "anything") == 1.0
    assert ngram_similarity("word", "a word here", 3) == 1.0


def test_tokenization_ignores_case_and_punctuation():
    assert tokenize_words("The Setback, (1,250) feet!") == ["the", "setback", "1250", "feet"]
    assert ngram_similarity("SETBACK: 500 Feet.", "the setback 500 feet applies") == 1.0


def test_similarity_rejects_bad_n():
    with pytest.raises(ValueError):
        ngram_similarity("a", "a", 0)


words = st.lists(st.sampled_from(["a", "b", "c", "d", "e"]), max_size=30)


@given(words, st.integers(0, 30), st.integers(0, 30), st.integers(1, 4))
def test_whole_token_substring_scores_one(tokens, i, j, n):
    i, j = sorted((min(i, len(tokens)), min(j, len(tokens))))
    assert ngram_similarity(" ".join(tokens[i:j]), " ".join(tokens), n) == 1.0


@given(words, words, st.integers(1, 4))
def test_similarity_in_unit_interval(a, b, n):
    assert 0.0 <= ngram_similarity(" ".join(a), " ".join(b), n) <= 1.0
