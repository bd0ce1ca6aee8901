from __future__ import annotations

import asyncio
import json
import re

import pytest

import oracles
from conftest import FIXTURES, run
from ordex.distill import (
    DISTILL_PROMPT,
    NO_CONTENT_SENTINEL,
    DistillConfig,
    RejectionReason,
    distill_document,
    extract_relevant,
    is_negative_answer,
    relevance_conversation,
)
from ordex.errors import DistillationError, PermanentBackendError
from ordex.ingest import DocumentText, Jurisdiction
from ordex.llm import Gateway, ScriptedBackend
from ordex.textops import ChunkingConfig, TextChunk, split_overlapping

J = Jurisdiction("Monroe", "WI")
HALLUCINATION = json.loads((FIXTURES / "hallucination.json").read_text())


def chunk_of(text: str) -> TextChunk:
    return TextChunk(0, 0, len(text), text)


def replying(text: str) -> Gateway:
    return Gateway(ScriptedBackend(default=text))


def test_prompt_carries_instruction_sentinel_and_chunk():
    cfg = DistillConfig(max_excerpt_words=123)
    conv = relevance_conversation(chunk_of("THE CHUNK"), cfg)
    prompt = conv.last_user_message
    assert prompt.startswith("Extract text related to the restrictions of wind energy systems")
    assert "definitions" in prompt and "verbatim" in prompt
    assert NO_CONTENT_SENTINEL in prompt and "123 words" in prompt
    assert '"""\nTHE CHUNK\n"""' in prompt
    assert conv.system_prompt


def test_verbatim_subset_accepted_with_similarity_one():
    excerpt = run(extract_relevant(chunk_of(HALLUCINATION["chunk"]), replying(HALLUCINATION["verbatim"]),
                                   DistillConfig()))
    assert excerpt.accepted and excerpt.similarity == 1.0 and excerpt.rejection_reason is None


def test_fabricated_excerpt_rejected_as_hallucination():
    expected = oracles.similarity(oracles.normalize(HALLUCINATION["fabricated"]),
                                  oracles.normalize(HALLUCINATION["chunk"]), 2)
    assert expected < 0.2
    excerpt = run(extract_relevant(chunk_of(HALLUCINATION["chunk"]), replying(HALLUCINATION["fabricated"]),
                                   DistillConfig()))
    assert not excerpt.accepted
    assert excerpt.rejection_reason is RejectionReason.HALLUCINATION
    assert excerpt.similarity == expected


@pytest.mark.parametrize("reply", [NO_CONTENT_SENTINEL, "no relevant text", '"No relevant text."'])
def test_sentinel_is_negative_answer(reply):
    assert is_negative_answer(reply)
    excerpt = run(extract_relevant(chunk_of("some text"), replying(reply), DistillConfig()))
    assert not excerpt.accepted and excerpt.rejection_reason is RejectionReason.NEGATIVE_ANSWER


def test_empty_reply_rejected():
    excerpt = run(extract_relevant(chunk_of("some text"), replying("   "), DistillConfig()))
    assert excerpt.rejection_reason is RejectionReason.EMPTY


def test_threshold_is_configurable():
    chunk = chunk_of("a b c d e f")
    half = "a b x y"  # bigrams ab, bx, xy: one of three present
    assert not run(extract_relevant(chunk, replying(half), DistillConfig())).accepted
    assert run(extract_relevant(chunk, replying(half), DistillConfig(threshold=0.3))).accepted


def test_empty_chunk_is_a_caller_error():
    with pytest.raises(ValueError):
        run(extract_relevant(chunk_of(""), replying("x"), DistillConfig()))


# -- whole documents ---------------------------------------------------------------

SMALL = ChunkingConfig(target_tokens=10, overlap_tokens=2)


def numbered_doc(n: int) -> DocumentText:
    # each "block" is one chunk under SMALL: 36 chars + separator
    return DocumentText.from_texts([" ".join(f"block{i:02d} alpha bravo charlie delta" for i in range(n))], J)


class ChunkEcho:
    """Answers chunk ``i`` with ``relevant[i]`` (or the sentinel), found by exact chunk text.

    Replies are delivered in reverse index order to shake out arrival-order bugs.
    """

    def __init__(self, doc: DocumentText, relevant: dict[int, str]) -> None:
        self.index = {c.text: c.index for c in split_overlapping(doc.cleaned().joined(), SMALL)}
        self.relevant = relevant

    async def chat(self, conv, params):
        chunk = re.search(r'"""\n(.*)\n"""', conv.last_user_message, re.S).group(1)
        idx = self.index[chunk]
        await asyncio.sleep(0.001 * (20 - idx))
        return self.relevant.get(idx, NO_CONTENT_SENTINEL)


def first_words(doc: DocumentText, idx: int, n: int = 3) -> str:
    return " ".join(split_overlapping(doc.cleaned().joined(), SMALL)[idx].text.split()[:n])


def test_everything_negative_gives_empty_text():
    doc = numbered_doc(5)
    out = run(distill_document(doc, Gateway(ScriptedBackend(default=NO_CONTENT_SENTINEL)), DistillConfig(chunking=SMALL)))
    assert out.combined == "" and out.is_empty and out.excerpts == ()
    assert len(out.rejected) == out.n_chunks > 1


def test_combined_follows_chunk_order_not_arrival_order():
    doc = numbered_doc(10)
    chunks = split_overlapping(doc.cleaned().joined(), SMALL)
    assert len(chunks) >= 8
    three, seven = first_words(doc, 3), first_words(doc, 7)
    backend = ChunkEcho(doc, {3: three, 7: seven})
    out = run(distill_document(doc, Gateway(backend), DistillConfig(chunking=SMALL)))
    assert [e.chunk_index for e in out.excerpts] == [3, 7]
    assert out.combined == f"{three}\n\n{seven}"
    assert all(e.similarity >= 0.8 for e in out.excerpts)


def test_adjacent_duplicates_collapse():
    doc = DocumentText.from_texts(["wind setback rule " * 20], J)
    out = run(distill_document(doc, replying("wind setback rule"), DistillConfig(chunking=SMALL)))
    assert out.n_chunks > 2
    assert out.combined == "wind setback rule"


def test_non_adjacent_duplicates_are_kept():
    doc = numbered_doc(6)
    backend = ChunkEcho(doc, {1: "alpha bravo", 2: first_words(doc, 2), 4: "alpha bravo"})
    out = run(distill_document(doc, Gateway(backend), DistillConfig(chunking=SMALL)))
    assert out.combined.split("\n\n") == ["alpha bravo", first_words(doc, 2), "alpha bravo"]


class FailOn:
    def __init__(self, failing: set[int]) -> None:
        self.failing = failing

    async def chat(self, conv, params):
        idx = int(re.search(r"block(\d\d)", conv.last_user_message).group(1))
        if idx in self.failing:
            raise PermanentBackendError("boom", 400)
        return NO_CONTENT_SENTINEL


def test_minority_chunk_failures_are_recorded():
    doc = numbered_doc(6)
    n = len(split_overlapping(doc.cleaned().joined(), SMALL))
    out = run(distill_document(doc, Gateway(FailOn({0, 1})), DistillConfig(chunking=SMALL)))
    assert len(out.errors) == 2 and 2 * 2 <= n


def test_majority_chunk_failures_fail_the_document():
    doc = numbered_doc(6)
    with pytest.raises(DistillationError) as info:
        run(distill_document(doc, Gateway(FailOn(set(range(6)))), DistillConfig(chunking=SMALL)))
    assert info.value.failed > info.value.total / 2


def test_distill_is_deterministic_and_provenance_serializes():
    doc = numbered_doc(10)
    cfg = DistillConfig(chunking=SMALL)
    a = run(distill_document(doc, Gateway(ChunkEcho(doc, {2: first_words(doc, 2)})), cfg))
    b = run(distill_document(doc, Gateway(ChunkEcho(doc, {2: first_words(doc, 2)})), cfg))
    assert a == b
    prov = json.loads(a.provenance_json())
    assert prov["accepted"][0]["chunk_index"] == 2
    assert len(prov["rejected"]) == a.n_chunks - 1


def test_distill_prompt_template_fields():
    assert set(re.findall(r"{(\w+)}", DISTILL_PROMPT)) == {"max_words", "sentinel", "chunk"}
