"""Structured model of wind siting ordinances."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from ordex.ingest import Jurisdiction
from ordex.llm.messages import Conversation

FEET_PER_METER = 3.28084


class FeatureType(str, enum.Enum):
    STRUCTURES_PARTICIPATING = "structures_participating"
    STRUCTURES_NONPARTICIPATING = "structures_nonparticipating"
    PROPERTY_LINE_PARTICIPATING = "property_line_participating"
    PROPERTY_LINE_NONPARTICIPATING = "property_line_nonparticipating"
    ROADS = "roads"
    RAILROADS = "railroads"
    TRANSMISSION_LINES = "transmission_lines"
    BODIES_OF_WATER = "bodies_of_water"
    NOISE = "noise"
    MAX_SYSTEM_HEIGHT = "max_system_height"
    MIN_LOT_SIZE = "min_lot_size"
    SHADOW_FLICKER = "shadow_flicker"
    TURBINE_DENSITY = "turbine_density"

    @property
    def is_setback(self) -> bool:
        """Distance-from-a-feature rules, as opposed to value limits (noise, height, ...)."""
        return self in _SETBACK_FEATURES

    @classmethod
    def parse(cls, value: str) -> "FeatureType":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown feature {value!r}") from None


_SETBACK_FEATURES = frozenset(list(FeatureType)[:8])


class SetbackKind(str, enum.Enum):
    FIXED_DISTANCE = "fixed_distance"
    TIP_HEIGHT_MULTIPLIER = "tip_height_multiplier"
    HUB_HEIGHT_MULTIPLIER = "hub_height_multiplier"
    ROTOR_DIAMETER_MULTIPLIER = "rotor_diameter_multiplier"
    HUB_PLUS_ROTOR_MULTIPLIER = "hub_plus_rotor_multiplier"
    MULTI_CONDITION = "multi_condition"

    @property
    def is_multiplier(self) -> bool:
        return self not in (SetbackKind.FIXED_DISTANCE, SetbackKind.MULTI_CONDITION)


class Unit(str, enum.Enum):
    FEET = "feet"
    METERS = "meters"
    # value-limit features reuse fixed-value semantics with their own units
    DBA = "dba"
    ACRES = "acres"
    HOURS_PER_YEAR = "hours_per_year"
    ACRES_PER_TURBINE = "acres_per_turbine"

    @property
    def is_length(self) -> bool:
        return self in (Unit.FEET, Unit.METERS)


LENGTH_UNITS = (Unit.FEET, Unit.METERS)


class Combinator(str, enum.Enum):
    LESSER = "lesser"
    GREATER = "greater"


class RecordStatus(str, enum.Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    NEEDS_REVIEW = "needs_review"


@dataclass(frozen=True)
class SetbackSpec:
    """How a setback (or value limit) is defined.

    * ``fixed_distance``: ``value`` in ``unit``.
    * multiplier kinds: dimensionless ``value``; no unit.
    * ``multi_condition``: ``conditions`` combined by ``combinator``; no top-level value.
    """

    kind: SetbackKind
    value: float | None = None
    unit: Unit | None = None
    conditions: tuple["SetbackSpec", ...] = ()
    combinator: Combinator | None = None

    def __post_init__(self) -> None:
        kind = SetbackKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "conditions", tuple(self.conditions))
        if self.unit is not None:
            object.__setattr__(self, "unit", Unit(self.unit))
        if self.combinator is not None:
            object.__setattr__(self, "combinator", Combinator(self.combinator))

        if kind is SetbackKind.MULTI_CONDITION:
            if not self.conditions:
                raise ValueError("multi_condition requires at least one condition")
            if self.combinator is None:
                raise ValueError("multi_condition requires a combinator")
            if self.value is not None or self.unit is not None:
                raise ValueError("multi_condition carries values only inside its conditions")
            return
        if self.conditions or self.combinator is not None:
            raise ValueError(f"{kind.value} cannot have conditions or a combinator")
        if self.value is None or not self.value > 0:
            raise ValueError(f"{kind.value} requires a positive value, got {self.value!r}")
        object.__setattr__(self, "value", float(self.value))
        if kind is SetbackKind.FIXED_DISTANCE and self.unit is None:
            raise ValueError("fixed_distance requires a unit")
        if kind.is_multiplier and self.unit is not None:
            raise ValueError("multiplier setbacks are dimensionless")

    @classmethod
    def fixed(cls, value: float, unit: Unit | str = Unit.FEET) -> "SetbackSpec":
        return cls(SetbackKind.FIXED_DISTANCE, value, Unit(unit))

    @classmethod
    def multiplier(cls, kind: SetbackKind | str, value: float) -> "SetbackSpec":
        return cls(SetbackKind(kind), value)

    @classmethod
    def multi(cls, combinator: Combinator | str, *conditions: "SetbackSpec") -> "SetbackSpec":
        return cls(SetbackKind.MULTI_CONDITION, conditions=conditions, combinator=Combinator(combinator))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is SetbackKind.MULTI_CONDITION:
            out["combinator"] = self.combinator.value
            out["conditions"] = [c.to_dict() for c in self.conditions]
        else:
            out["value"] = self.value
            out["unit"] = self.unit.value if self.unit else None
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SetbackSpec":
        kind = SetbackKind(data["kind"])
        if kind is SetbackKind.MULTI_CONDITION:
            return cls(kind, conditions=tuple(cls.from_dict(c) for c in data["conditions"]),
                       combinator=Combinator(data["combinator"]))
        return cls(kind, data["value"], data.get("unit"))


@dataclass(frozen=True)
class ReferenceTurbine:
    hub_height_ft: float = 377.0
    blade_length_ft: float = 279.0

    def __post_init__(self) -> None:
        if self.hub_height_ft <= 0 or self.blade_length_ft <= 0:
            raise ValueError("turbine dimensions must be positive")

    @property
    def rotor_diameter_ft(self) -> float:
        return 2 * self.blade_length_ft

    @property
    def tip_height_ft(self) -> float:
        return self.hub_height_ft + self.blade_length_ft


DEFAULT_TURBINE = ReferenceTurbine()


@dataclass(frozen=True)
class OrdinanceRecord:
    jurisdiction: Jurisdiction
    feature: FeatureType
    status: RecordStatus
    spec: SetbackSpec | None = None
    effective_setback_ft: float | None = None
    source_excerpt: str = ""
    transcript_ref: str = ""
    review: dict[str, Any] | None = None
    # kept in memory for the review queue; not part of the record file
    transcript: Conversation | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "feature", FeatureType(self.feature))
        object.__setattr__(self, "status", RecordStatus(self.status))
        if (self.spec is not None) != (self.status is RecordStatus.FOUND):
            raise ValueError("spec must be present exactly when status is found")
        if self.status is RecordStatus.NEEDS_REVIEW and not self.review:
            raise ValueError("needs_review records must carry review context")

    def to_dict(self) -> dict[str, Any]:
        return {
            "jurisdiction": {"county": self.jurisdiction.county, "state": self.jurisdiction.state},
            "feature": self.feature.value,
            "status": self.status.value,
            "spec": self.spec.to_dict() if self.spec else None,
            "effective_setback_ft": self.effective_setback_ft,
            "source_excerpt": self.source_excerpt,
            "transcript_ref": self.transcript_ref,
            "review": self.review,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OrdinanceRecord":
        j = data["jurisdiction"]
        spec = data.get("spec")
        return cls(
            jurisdiction=Jurisdiction(j["county"], j["state"]),
            feature=FeatureType(data["feature"]),
            status=RecordStatus(data["status"]),
            spec=SetbackSpec.from_dict(spec) if spec else None,
            effective_setback_ft=data.get("effective_setback_ft"),
            source_excerpt=data.get("source_excerpt", ""),
            transcript_ref=data.get("transcript_ref", ""),
            review=data.get("review"),
        )
