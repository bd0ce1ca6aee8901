"""Token budgeting, overlapping chunking, and word n-gram similarity."""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass

CHARS_PER_TOKEN = 4
DEFAULT_NGRAM = 2
DEFAULT_SIMILARITY_THRESHOLD = 0.80


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text) / CHARS_PER_TOKEN)


@dataclass(frozen=True)
class ChunkingConfig:
    target_tokens: int = 3000
    overlap_tokens: int = 300

    def __post_init__(self) -> None:
        if self.target_tokens < 1:
            raise ValueError("target_tokens must be positive")
        if not 0 <= self.overlap_tokens < self.target_tokens:
            raise ValueError("overlap_tokens must be in [0, target_tokens)")


@dataclass(frozen=True)
class TextChunk:
    """A window of the source text. Offsets index Python characters."""

    index: int
    start_offset: int
    end_offset: int
    text: str


def split_overlapping(text: str, cfg: ChunkingConfig) -> list[TextChunk]:
    """Split ``text`` into overlapping windows of at most ``cfg.target_tokens``.

    Each window is cut at the last whitespace inside its final 10% when such
    whitespace exists, and the next window starts ``overlap_tokens`` before
    that cut, pulled back to the start of the word it lands in.
    """
    if not text:
        return []
    budget = cfg.target_tokens * CHARS_PER_TOKEN
    overlap = cfg.overlap_tokens * CHARS_PER_TOKEN
    tail = math.ceil(budget / 10)
    n = len(text)

    chunks: list[TextChunk] = []
    start = 0
    while True:
        end = min(start + budget, n)
        if end < n:
            for i in range(end - 1, end - tail - 1, -1):
                if text[i].isspace():
                    end = i + 1
                    break
        chunks.append(TextChunk(len(chunks), start, end, text[start:end]))
        if end >= n:
            return chunks

        nxt = max(end - overlap, start + 1)
        # back up to the beginning of the word we landed in, if it began after `start`
        j = nxt
        while j > start + 1 and not text[j - 1].isspace():
            j -= 1
        if text[j - 1].isspace():
            nxt = j
        start = nxt


def tokenize_words(text: str) -> list[str]:
    """Case-fold, drop punctuation characters, split on whitespace."""
    kept = "".join(ch for ch in text.casefold() if not unicodedata.category(ch).startswith("P"))
    return kept.split()


def _ngrams(tokens: list[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def ngram_similarity(candidate: str, source: str, n: int = DEFAULT_NGRAM) -> float:
    """Fraction of the candidate's distinct word n-grams that also occur in source.

    A candidate shorter than ``n`` words is scored on its single whole-token
    sequence. An empty candidate scores 1.0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = tokenize_words(candidate)
    if not cand:
        return 1.0
    k = min(n, len(cand))
    wanted = _ngrams(cand, k)
    have = _ngrams(tokenize_words(source), k)
    return len(wanted & have) / len(wanted)
