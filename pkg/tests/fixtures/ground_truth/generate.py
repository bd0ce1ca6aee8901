"""Regenerate the synthetic ground-truth fixtures.

Each split gets a truth CSV and a records JSONL whose pairings land in
prescribed confusion cells. Values are made up; only the cell counts matter.

    python3 tests/fixtures/ground_truth/generate.py
"""

from __future__ import annotations

import random
from pathlib import Path

from ordex.evaluate import Cell, GroundTruthRecord, records_to_jsonl, write_truth_csv
from ordex.ingest import Jurisdiction
from ordex.ordinance import FeatureType, OrdinanceRecord, RecordStatus, SetbackKind, SetbackSpec
from ordex.ordinance.trees import WORDING

HERE = Path(__file__).parent

# (correct_tp, incorrect_tp, false_negative, false_positive, true_negative)
SPLITS = {
    "training": (18, (61, 11, 20, 2, 140)),
    "test": (85, (325, 34, 42, 34, 670)),
}


def _spec(feature: FeatureType, rng: random.Random) -> SetbackSpec:
    if feature.is_setback and rng.random() < 0.4:
        return SetbackSpec.multiplier(SetbackKind.TIP_HEIGHT_MULTIPLIER, rng.choice([1.1, 1.5, 2.0, 3.0]))
    return SetbackSpec.fixed(rng.choice([40, 250, 500, 1000, 1250]), WORDING[feature].units[0])


def _wrong(spec: SetbackSpec) -> SetbackSpec:
    return SetbackSpec(spec.kind, spec.value + 0.5, spec.unit)


def build(n_counties: int, cells: tuple[int, ...], seed: int):
    rng = random.Random(seed)
    layout = [cell for cell, n in zip(Cell, cells) for _ in range(n)]
    assert len(layout) == n_counties * len(FeatureType)
    rng.shuffle(layout)
    truth, records = [], []
    pairs = [(Jurisdiction(f"County {i:03d}", "XX"), f) for i in range(1, n_counties + 1) for f in FeatureType]
    for (j, feature), cell in zip(pairs, layout):
        spec = _spec(feature, rng)
        exists = cell in (Cell.CORRECT_TP, Cell.INCORRECT_TP, Cell.FALSE_NEGATIVE)
        truth.append(GroundTruthRecord(j, feature, exists, spec if exists else None))
        if cell is Cell.CORRECT_TP:
            found = spec
        elif cell is Cell.INCORRECT_TP:
            found = _wrong(spec)
        elif cell is Cell.FALSE_POSITIVE:
            found = spec
        else:
            found = None
        status = RecordStatus.FOUND if found else RecordStatus.NOT_FOUND
        records.append(OrdinanceRecord(j, feature, status, found))
    return truth, records


def main() -> None:
    for seed, (name, (n, cells)) in enumerate(SPLITS.items()):
        out = HERE / name
        out.mkdir(exist_ok=True)
        truth, records = build(n, cells, seed)
        write_truth_csv(truth, out / "truth.csv")
        (out / "records.jsonl").write_text(records_to_jsonl(records), encoding="utf-8")


if __name__ == "__main__":
    main()
