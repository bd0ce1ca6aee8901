"""Run the feature trees over distilled text and assemble ordinance records."""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Iterable

from ordex.distill import DistilledText
from ordex.errors import BackendError, SetbackParseError
from ordex.llm import Conversation, Gateway, GenerationParams, request_digest
from ordex.llm.backends import ChatBackend
from ordex.ordinance.schema import (
    DEFAULT_TURBINE,
    Combinator,
    FeatureType,
    OrdinanceRecord,
    RecordStatus,
    ReferenceTurbine,
    SetbackKind,
    SetbackSpec,
)
from ordex.ordinance.setback import (
    effective_setback,
    is_distance_spec,
    parse_multiplier_statement,
    parse_value_statement,
)
from ordex.ordinance import trees
from ordex.tree.engine import LeafResult, NoMatch, as_gateway, run

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionConfig:
    turbine: ReferenceTurbine = DEFAULT_TURBINE
    params: GenerationParams = field(default_factory=GenerationParams)
    features: tuple[FeatureType, ...] = tuple(FeatureType)


def _journal_key(transcript: Conversation, params: GenerationParams) -> str:
    """Cache/journal digest of the exchange that produced the final reply."""
    if len(transcript) and not transcript.awaiting_reply:
        return request_digest(Conversation(transcript.messages[:-1]), params)
    return ""


def _spec_from_leaf(outcome: LeafResult, feature: FeatureType) -> SetbackSpec:
    kind = SetbackKind(outcome.bindings[trees.KIND_BINDING])
    if outcome.leaf_id == trees.MULTIPLIER_STATEMENT:
        return SetbackSpec.multiplier(kind, parse_multiplier_statement(outcome.final_response))
    wording = trees.WORDING[feature]
    noun = "setback" if feature.is_setback else wording.noun
    value, unit = parse_value_statement(outcome.final_response, noun, wording.units)
    resolved = SetbackSpec.fixed(value, unit)
    if kind is SetbackKind.MULTI_CONDITION:
        # the conversation yields only the selected condition, not every candidate
        return SetbackSpec.multi(Combinator.GREATER, resolved)
    return resolved


def record_from_outcome(
    distilled: DistilledText,
    feature: FeatureType,
    outcome: LeafResult | NoMatch,
    cfg: ExtractionConfig,
) -> OrdinanceRecord:
    common = dict(
        jurisdiction=distilled.jurisdiction,
        feature=feature,
        source_excerpt=distilled.combined,
        transcript_ref=_journal_key(outcome.transcript, cfg.params),
        transcript=outcome.transcript,
    )
    if isinstance(outcome, NoMatch):
        review = {"reason": "no_matching_edge", "node_id": outcome.node_id,
                  "prompt": outcome.prompt, "response": outcome.response}
        return OrdinanceRecord(status=RecordStatus.NEEDS_REVIEW, review=review, **common)

    if outcome.leaf_id == trees.NOT_FOUND:
        return OrdinanceRecord(status=RecordStatus.NOT_FOUND, **common)
    if outcome.leaf_id in trees.REVIEW_LEAVES:
        review = {"reason": outcome.leaf_id, "node_id": outcome.leaf_id,
                  "prompt": "", "response": outcome.final_response}
        return OrdinanceRecord(status=RecordStatus.NEEDS_REVIEW, review=review, **common)
    try:
        spec = _spec_from_leaf(outcome, feature)
    except (SetbackParseError, KeyError, ValueError) as exc:
        review = {"reason": "parse_failure", "node_id": outcome.leaf_id,
                  "prompt": "", "response": outcome.final_response, "error": str(exc)}
        return OrdinanceRecord(status=RecordStatus.NEEDS_REVIEW, review=review, **common)
    effective = effective_setback(spec, cfg.turbine) if is_distance_spec(spec) else None
    return OrdinanceRecord(status=RecordStatus.FOUND, spec=spec, effective_setback_ft=effective, **common)


async def extract_feature(
    distilled: DistilledText,
    feature: FeatureType,
    gateway: Gateway,
    cfg: ExtractionConfig,
) -> OrdinanceRecord:
    if distilled.is_empty:
        return OrdinanceRecord(distilled.jurisdiction, feature, RecordStatus.NOT_FOUND)
    graph = trees.build_wind_tree(feature, cfg.turbine)
    try:
        outcome = await run(graph, distilled.combined, feature, gateway, cfg.params)
    except BackendError as exc:
        logger.warning("%s / %s: backend failure, flagged for review: %s", distilled.jurisdiction, feature.value, exc)
        review = {"reason": "backend_error", "node_id": "", "prompt": "", "response": "",
                  "error": f"{type(exc).__name__}: {exc}"}
        return OrdinanceRecord(distilled.jurisdiction, feature, RecordStatus.NEEDS_REVIEW,
                               source_excerpt=distilled.combined, review=review)
    return record_from_outcome(distilled, feature, outcome, cfg)


async def extract_ordinances(
    distilled: DistilledText,
    features: Iterable[FeatureType] | None,
    backend: Gateway | ChatBackend,
    cfg: ExtractionConfig | None = None,
) -> list[OrdinanceRecord]:
    """One record per requested feature, in the order the features were given."""
    cfg = cfg or ExtractionConfig()
    features = list(cfg.features if features is None else features)
    gateway = as_gateway(backend)
    return list(await asyncio.gather(*(extract_feature(distilled, f, gateway, cfg) for f in features)))
