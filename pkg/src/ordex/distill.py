"""Reduce a long ordinance document to the passages about wind energy systems."""

from __future__ import annotations

import asyncio
import enum
import json
from dataclasses import dataclass, field

from ordex.errors import BackendError, DistillationError
from ordex.ingest import DocumentText, Jurisdiction
from ordex.llm import Conversation, Gateway, GenerationParams, system, user
from ordex.textops import (
    DEFAULT_NGRAM,
    DEFAULT_SIMILARITY_THRESHOLD,
    ChunkingConfig,
    TextChunk,
    ngram_similarity,
    split_overlapping,
)

NO_CONTENT_SENTINEL = "No relevant text."

DISTILL_SYSTEM_PROMPT = (
    "You are a legal scholar reading local zoning ordinances. You copy passages "
    "verbatim from the legal text you are given. You never add, reword, or "
    "summarize text."
)

DISTILL_PROMPT = (
    "Extract text related to the restrictions of wind energy systems from the legal text "
    "below. Also keep passages that define terms those restrictions rely on, such as "
    "definitions of turbine height, participating or non-participating property, or wind "
    "energy system size classes. Return only text copied verbatim from the legal text; do not "
    "add any other text, headings, or commentary. Return at most {max_words} words. If the "
    "legal text contains nothing related to wind energy systems, respond with exactly: "
    '"{sentinel}"\n\n'
    'Legal text:\n"""\n{chunk}\n"""'
)


class RejectionReason(str, enum.Enum):
    HALLUCINATION = "hallucination"
    NEGATIVE_ANSWER = "negative_answer"
    EMPTY = "empty"


@dataclass(frozen=True)
class DistillConfig:
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    ngram: int = DEFAULT_NGRAM
    max_excerpt_words: int = 600
    params: GenerationParams = field(default_factory=GenerationParams)

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be within [0, 1]")


@dataclass(frozen=True)
class Excerpt:
    chunk_index: int
    text: str
    similarity: float
    accepted: bool
    rejection_reason: RejectionReason | None = None

    def to_dict(self) -> dict:
        return {
            "chunk_index": self.chunk_index,
            "similarity": self.similarity,
            "accepted": self.accepted,
            "rejection_reason": self.rejection_reason.value if self.rejection_reason else None,
            "text": self.text,
        }


@dataclass(frozen=True)
class DistilledText:
    jurisdiction: Jurisdiction
    excerpts: tuple[Excerpt, ...]
    combined: str
    rejected: tuple[Excerpt, ...] = ()
    errors: tuple[tuple[int, str], ...] = ()
    n_chunks: int = 0

    @property
    def is_empty(self) -> bool:
        return not self.combined.strip()

    def provenance(self) -> dict:
        """Sidecar record: which chunks were kept, dropped, or failed and why."""
        return {
            "jurisdiction": {"county": self.jurisdiction.county, "state": self.jurisdiction.state},
            "n_chunks": self.n_chunks,
            "accepted": [e.to_dict() for e in self.excerpts],
            "rejected": [e.to_dict() for e in self.rejected],
            "errors": [{"chunk_index": i, "error": msg} for i, msg in self.errors],
        }

    def provenance_json(self) -> str:
        return json.dumps(self.provenance(), indent=2, ensure_ascii=False)


def is_negative_answer(response: str) -> bool:
    normalized = response.strip().strip("\"'.").strip().casefold()
    return normalized == NO_CONTENT_SENTINEL.rstrip(".").casefold()


def relevance_conversation(chunk: TextChunk, cfg: DistillConfig) -> Conversation:
    prompt = DISTILL_PROMPT.format(max_words=cfg.max_excerpt_words, sentinel=NO_CONTENT_SENTINEL, chunk=chunk.text)
    return Conversation((system(DISTILL_SYSTEM_PROMPT), user(prompt)))


async def extract_relevant(chunk: TextChunk, gateway: Gateway, cfg: DistillConfig) -> Excerpt:
    if not chunk.text:
        raise ValueError("cannot distill an empty chunk")
    reply = await gateway.cached_complete(relevance_conversation(chunk, cfg), cfg.params)
    text = reply.content.strip()
    if not text:
        return Excerpt(chunk.index, "", 0.0, False, RejectionReason.EMPTY)
    if is_negative_answer(text):
        return Excerpt(chunk.index, text, 0.0, False, RejectionReason.NEGATIVE_ANSWER)
    similarity = ngram_similarity(text, chunk.text, cfg.ngram)
    if similarity < cfg.threshold:
        return Excerpt(chunk.index, text, similarity, False, RejectionReason.HALLUCINATION)
    return Excerpt(chunk.index, text, similarity, True)


async def distill_document(doc: DocumentText, gateway: Gateway, cfg: DistillConfig | None = None) -> DistilledText:
    cfg = cfg or DistillConfig()
    chunks = [c for c in split_overlapping(doc.cleaned().joined(), cfg.chunking) if c.text.strip()]
    results = await asyncio.gather(*(extract_relevant(c, gateway, cfg) for c in chunks), return_exceptions=True)

    accepted: list[Excerpt] = []
    rejected: list[Excerpt] = []
    errors: list[tuple[int, str]] = []
    for chunk, result in zip(chunks, results):
        if isinstance(result, BaseException):
            if not isinstance(result, (BackendError, OSError)):
                raise result
            errors.append((chunk.index, f"{type(result).__name__}: {result}"))
        elif result.accepted:
            accepted.append(result)
        else:
            rejected.append(result)

    if 2 * len(errors) > len(chunks):
        raise DistillationError(len(errors), len(chunks), errors)

    kept: list[Excerpt] = []
    for excerpt in sorted(accepted, key=lambda e: e.chunk_index):
        if kept and kept[-1].text == excerpt.text:
            continue
        kept.append(excerpt)
    combined = "\n\n".join(e.text for e in kept)
    return DistilledText(doc.jurisdiction, tuple(kept), combined, tuple(rejected), tuple(errors), len(chunks))
