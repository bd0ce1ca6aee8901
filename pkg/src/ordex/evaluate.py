"""Score extracted ordinance records against ground truth.

Every (jurisdiction, feature) pair falls in one of five cells:

==============  ====================  =================
                model found           model did not find
==============  ====================  =================
exists          correct / incorrect   false negative
absent          false positive        true negative
==============  ====================  =================

``needs_review`` extractions count as "did not find" for the metrics and are
listed separately so a person can resolve them.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from ordex.errors import InputFormatError
from ordex.ingest import Jurisdiction
from ordex.ordinance.schema import (
    FEET_PER_METER,
    Combinator,
    FeatureType,
    OrdinanceRecord,
    RecordStatus,
    SetbackKind,
    SetbackSpec,
    Unit,
)

VALUE_RTOL = 1e-6


class Cell(str, Enum):
    CORRECT_TP = "correct_tp"
    INCORRECT_TP = "incorrect_tp"
    FALSE_NEGATIVE = "false_negative"
    FALSE_POSITIVE = "false_positive"
    TRUE_NEGATIVE = "true_negative"


@dataclass(frozen=True)
class GroundTruthRecord:
    jurisdiction: Jurisdiction
    feature: FeatureType
    exists: bool
    spec: SetbackSpec | None = None

    def __post_init__(self) -> None:
        if (self.spec is not None) != self.exists:
            raise ValueError("ground truth spec must be present exactly when the ordinance exists")


@dataclass(frozen=True)
class ConfusionCounts:
    correct_tp: int = 0
    incorrect_tp: int = 0
    false_negative: int = 0
    false_positive: int = 0
    true_negative: int = 0

    @property
    def total(self) -> int:
        return self.correct_tp + self.incorrect_tp + self.false_negative + self.false_positive + self.true_negative

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.correct_tp, self.incorrect_tp, self.false_negative, self.false_positive, self.true_negative)

    def to_dict(self) -> dict[str, int]:
        return {cell.value: n for cell, n in zip(Cell, self.as_tuple())}

    @classmethod
    def from_cells(cls, cells: Iterable[Cell]) -> "ConfusionCounts":
        c = Counter(cells)
        return cls(*(c[cell] for cell in Cell))


@dataclass(frozen=True)
class Metrics:
    """``None`` marks a metric whose denominator is zero."""

    accuracy: float | None
    precision: float | None
    recall: float | None

    def to_dict(self) -> dict[str, float | None]:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall}


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics(counts: ConfusionCounts) -> Metrics:
    """Accuracy, precision, recall.

    recall = correct / (correct + false negatives); wrong finds are kept out
    of the recall denominator.
    """
    return Metrics(
        accuracy=_ratio(counts.correct_tp + counts.true_negative, counts.total),
        precision=_ratio(counts.correct_tp, counts.correct_tp + counts.false_positive),
        recall=_ratio(counts.correct_tp, counts.correct_tp + counts.false_negative),
    )


# -- comparison ---------------------------------------------------------------


def _canonical(spec: SetbackSpec) -> tuple:
    if spec.kind is SetbackKind.MULTI_CONDITION:
        return (spec.kind.value, spec.combinator.value, tuple(sorted(_canonical(c) for c in spec.conditions)))
    value, unit = spec.value, spec.unit
    if unit is Unit.METERS:
        value, unit = value * FEET_PER_METER, Unit.FEET
    return (spec.kind.value, unit.value if unit else "", value)


def _values_close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=VALUE_RTOL)


def specs_equivalent(a: SetbackSpec, b: SetbackSpec) -> bool:
    """Same kind, values within 1e-6 relative after unit normalization; multi-conditions unordered."""
    if a.kind is not b.kind:
        return False
    if a.kind is SetbackKind.MULTI_CONDITION:
        if a.combinator is not b.combinator or len(a.conditions) != len(b.conditions):
            return False
        remaining = list(b.conditions)
        for cond in a.conditions:
            for i, other in enumerate(remaining):
                if specs_equivalent(cond, other):
                    del remaining[i]
                    break
            else:
                return False
        return True
    ka, kb = _canonical(a), _canonical(b)
    return ka[1] == kb[1] and _values_close(ka[2], kb[2])


def classify_pair(extracted: OrdinanceRecord, truth: GroundTruthRecord) -> Cell:
    if (extracted.jurisdiction, extracted.feature) != (truth.jurisdiction, truth.feature):
        raise ValueError(
            f"cannot compare {extracted.jurisdiction}/{extracted.feature.value} "
            f"with {truth.jurisdiction}/{truth.feature.value}"
        )
    found = extracted.status is RecordStatus.FOUND
    if truth.exists:
        if not found:
            return Cell.FALSE_NEGATIVE
        return Cell.CORRECT_TP if specs_equivalent(extracted.spec, truth.spec) else Cell.INCORRECT_TP
    return Cell.FALSE_POSITIVE if found else Cell.TRUE_NEGATIVE


# -- evaluation run -----------------------------------------------------------


@dataclass
class Evaluation:
    counts: ConfusionCounts
    metrics: Metrics
    per_feature: dict[FeatureType, ConfusionCounts]
    review_queue: list[OrdinanceRecord] = field(default_factory=list)
    pairs: list[tuple[Jurisdiction, FeatureType, Cell]] = field(default_factory=list)
    unmatched_records: int = 0


def evaluate(records: Sequence[OrdinanceRecord], truth: Sequence[GroundTruthRecord]) -> Evaluation:
    """Compare every ground-truth pair; a pair with no extracted record counts as not found."""
    by_key = {(r.jurisdiction, r.feature): r for r in records}
    pairs = []
    for t in truth:
        rec = by_key.pop((t.jurisdiction, t.feature), None) or OrdinanceRecord(
            t.jurisdiction, t.feature, RecordStatus.NOT_FOUND)
        pairs.append((t.jurisdiction, t.feature, classify_pair(rec, t)))
    counts = ConfusionCounts.from_cells(cell for _, _, cell in pairs)
    per_feature = {
        f: ConfusionCounts.from_cells(cell for _, feat, cell in pairs if feat is f)
        for f in FeatureType
        if any(feat is f for _, feat, _ in pairs)
    }
    queue = [r for r in records if r.status is RecordStatus.NEEDS_REVIEW]
    return Evaluation(counts, metrics(counts), per_feature, queue, pairs, unmatched_records=len(by_key))


# -- reports ------------------------------------------------------------------


def _pct(n: int, total: int) -> str:
    return f"{round(100 * n / total)}%" if total else "0%"


def _metric_pct(value: float | None) -> str:
    return "n/a" if value is None else f"{100 * value:.1f}%"


def render_table(counts: ConfusionCounts) -> str:
    t = counts.total
    found_true = f"{counts.correct_tp} ({_pct(counts.correct_tp, t)}) correct, " \
                 f"{counts.incorrect_tp} ({_pct(counts.incorrect_tp, t)}) incorrect"
    rows = [
        ("", "Model found: True", "Model found: False"),
        ("Exists: True", found_true, f"{counts.false_negative} ({_pct(counts.false_negative, t)})"),
        ("Exists: False", f"{counts.false_positive} ({_pct(counts.false_positive, t)})",
         f"{counts.true_negative} ({_pct(counts.true_negative, t)})"),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows)


def report(
    counts: ConfusionCounts,
    m: Metrics,
    per_feature: dict[FeatureType, ConfusionCounts] | None = None,
    review_queue: Sequence[OrdinanceRecord] = (),
) -> dict[str, Any]:
    per_feature = per_feature or {}
    t = counts.total
    return {
        "total": t,
        "cells": counts.to_dict(),
        "cell_percent": {k: _pct(v, t) for k, v in counts.to_dict().items()},
        "metrics": m.to_dict(),
        "metric_definitions": {
            "accuracy": "(correct_tp + true_negative) / total",
            "precision": "correct_tp / (correct_tp + false_positive)",
            "recall": "correct_tp / (correct_tp + false_negative); incorrect_tp is excluded from the denominator",
        },
        "failure_modes": {
            "false_positive": counts.false_positive,
            "false_negative": counts.false_negative,
            "wrong_ordinance": counts.incorrect_tp,
        },
        "per_feature": {
            f.value: {"cells": c.to_dict(), "metrics": metrics(c).to_dict()} for f, c in per_feature.items()
        },
        "review_queue": [
            {"jurisdiction": str(r.jurisdiction), "feature": r.feature.value, "review": r.review}
            for r in review_queue
        ],
    }


def render_text(rep: dict[str, Any]) -> str:
    counts = ConfusionCounts(**rep["cells"])
    m = rep["metrics"]
    lines = [
        f"Ordinance values compared: {rep['total']}",
        "",
        render_table(counts),
        "",
        f"Accuracy:  {_metric_pct(m['accuracy'])}",
        f"Precision: {_metric_pct(m['precision'])}",
        f"Recall:    {_metric_pct(m['recall'])}",
        "",
        "Recall counts only correct finds against correct finds plus misses; finds with the",
        "wrong value are excluded from its denominator. Including them lowers recall to",
        f"{_metric_pct(_ratio(counts.correct_tp, counts.correct_tp + counts.incorrect_tp + counts.false_negative))}.",
        "",
        "Failure modes:",
        f"  false positive (ordinance reported but absent): {rep['failure_modes']['false_positive']}",
        f"  false negative (ordinance missed):              {rep['failure_modes']['false_negative']}",
        f"  wrong ordinance (found with wrong value):       {rep['failure_modes']['wrong_ordinance']}",
    ]
    if rep["per_feature"]:
        lines += ["", "Per feature (correct/incorrect/FN/FP/TN):"]
        width = max(len(f) for f in rep["per_feature"])
        for feature, data in rep["per_feature"].items():
            c = data["cells"]
            lines.append(
                f"  {feature.ljust(width)}  {c['correct_tp']}/{c['incorrect_tp']}/{c['false_negative']}"
                f"/{c['false_positive']}/{c['true_negative']}  accuracy {_metric_pct(data['metrics']['accuracy'])}"
            )
    lines += ["", f"Needs review: {len(rep['review_queue'])}"]
    for item in rep["review_queue"]:
        reason = (item.get("review") or {}).get("reason", "")
        lines.append(f"  {item['jurisdiction']} / {item['feature']}: {reason}")
    return "\n".join(lines) + "\n"


# -- file formats -------------------------------------------------------------

TRUTH_COLUMNS = ("county", "state", "feature", "exists", "kind", "value", "unit", "combinator", "condition_list")
_TRUE = {"true", "yes", "1", "y", "t"}
_FALSE = {"false", "no", "0", "n", "f", ""}


def _parse_condition(text: str) -> SetbackSpec:
    parts = [p.strip() for p in text.split(":")]
    if len(parts) == 2:
        return SetbackSpec(SetbackKind(parts[0]), float(parts[1]))
    if len(parts) == 3:
        return SetbackSpec(SetbackKind(parts[0]), float(parts[1]), Unit(parts[2]))
    raise ValueError(f"condition {text!r} must be kind:value or kind:value:unit")


def _format_condition(spec: SetbackSpec) -> str:
    base = f"{spec.kind.value}:{spec.value!r}"
    return f"{base}:{spec.unit.value}" if spec.unit else base


def parse_truth_row(row: dict[str, str]) -> GroundTruthRecord:
    get = lambda k: (row.get(k) or "").strip()  # noqa: E731
    jurisdiction = Jurisdiction(get("county"), get("state"))
    feature = FeatureType.parse(get("feature"))
    exists_raw = get("exists").lower()
    if exists_raw not in _TRUE | _FALSE:
        raise ValueError(f"exists must be true/false, got {get('exists')!r}")
    if exists_raw in _FALSE:
        return GroundTruthRecord(jurisdiction, feature, False)
    kind = SetbackKind(get("kind"))
    if kind is SetbackKind.MULTI_CONDITION:
        conds = tuple(_parse_condition(c) for c in get("condition_list").split(";") if c.strip())
        spec = SetbackSpec.multi(Combinator(get("combinator")), *conds)
    else:
        spec = SetbackSpec(kind, float(get("value")), Unit(get("unit")) if get("unit") else None)
    return GroundTruthRecord(jurisdiction, feature, True, spec)


def read_truth_csv(path: str | Path) -> list[GroundTruthRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("county", "state", "feature", "exists") if c not in (reader.fieldnames or [])]
        if reader.fieldnames is not None and missing:
            raise InputFormatError(str(path), 1, f"missing columns {missing}")
        out = []
        for row in reader:
            try:
                out.append(parse_truth_row(row))
            except (ValueError, KeyError) as exc:
                raise InputFormatError(str(path), reader.line_num, str(exc)) from None
    return out


def truth_to_row(t: GroundTruthRecord) -> dict[str, str]:
    row = dict.fromkeys(TRUTH_COLUMNS, "")
    row.update(county=t.jurisdiction.county, state=t.jurisdiction.state, feature=t.feature.value,
               exists="true" if t.exists else "false")
    if t.spec is not None:
        row["kind"] = t.spec.kind.value
        if t.spec.kind is SetbackKind.MULTI_CONDITION:
            row["combinator"] = t.spec.combinator.value
            row["condition_list"] = ";".join(_format_condition(c) for c in t.spec.conditions)
        else:
            row["value"] = repr(t.spec.value)
            row["unit"] = t.spec.unit.value if t.spec.unit else ""
    return row


def write_truth_csv(truth: Iterable[GroundTruthRecord], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRUTH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for t in truth:
        writer.writerow(truth_to_row(t))
    if path is not None:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")
    return buf.getvalue()


def read_records_jsonl(path: str | Path) -> list[OrdinanceRecord]:
    path = Path(path)
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(OrdinanceRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputFormatError(str(path), lineno, str(exc)) from None
    return out


def records_to_jsonl(records: Iterable[OrdinanceRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=False) + "\n" for r in records)
