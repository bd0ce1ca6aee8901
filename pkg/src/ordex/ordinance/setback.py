"""Effective setback arithmetic and parsing of the models' final statements."""

from __future__ import annotations

import re
from decimal import Decimal
from typing import Iterable

from ordex.errors import SetbackParseError
from ordex.ordinance.schema import (
    FEET_PER_METER,
    LENGTH_UNITS,
    Combinator,
    ReferenceTurbine,
    SetbackKind,
    SetbackSpec,
    Unit,
)


def to_feet(value: float, unit: Unit) -> float:
    if unit is Unit.FEET:
        return value
    if unit is Unit.METERS:
        return value * FEET_PER_METER
    raise ValueError(f"{unit.value} is not a length unit")


def effective_setback(spec: SetbackSpec, turbine: ReferenceTurbine) -> float:
    """Resolve ``spec`` to a distance in feet for ``turbine``."""
    kind = spec.kind
    if kind is SetbackKind.FIXED_DISTANCE:
        return to_feet(spec.value, spec.unit)
    if kind is SetbackKind.TIP_HEIGHT_MULTIPLIER:
        return spec.value * turbine.tip_height_ft
    if kind is SetbackKind.HUB_HEIGHT_MULTIPLIER:
        return spec.value * turbine.hub_height_ft
    if kind is SetbackKind.ROTOR_DIAMETER_MULTIPLIER:
        return spec.value * turbine.rotor_diameter_ft
    if kind is SetbackKind.HUB_PLUS_ROTOR_MULTIPLIER:
        return spec.value * (turbine.hub_height_ft + turbine.rotor_diameter_ft)
    distances = [effective_setback(c, turbine) for c in spec.conditions]
    return min(distances) if spec.combinator is Combinator.LESSER else max(distances)


def is_distance_spec(spec: SetbackSpec) -> bool:
    """True when ``spec`` resolves to a length (so an effective setback exists)."""
    if spec.kind is SetbackKind.MULTI_CONDITION:
        return all(is_distance_spec(c) for c in spec.conditions)
    if spec.kind is SetbackKind.FIXED_DISTANCE:
        return spec.unit.is_length
    return True


# -- statement parsing ---------------------------------------------------------

_UNIT_ALIASES: dict[Unit, tuple[str, ...]] = {
    Unit.FEET: ("feet", "foot", "ft", "linear feet", "'"),
    Unit.METERS: ("meters", "meter", "metres", "metre", "m"),
    Unit.DBA: ("dba", "db(a)", "db a", "db", "decibels", "decibel", "decibels (dba)"),
    Unit.ACRES: ("acres", "acre", "ac"),
    Unit.HOURS_PER_YEAR: ("hours per year", "hours/year", "hours a year", "hrs/yr", "hours/yr",
                          "hours per calendar year", "hours"),
    Unit.ACRES_PER_TURBINE: ("acres per turbine", "acres/turbine", "acres per wind turbine"),
}
_ALIAS_TO_UNIT = {alias: unit for unit, aliases in _UNIT_ALIASES.items() for alias in aliases}

UNIT_WORDS = {
    Unit.FEET: "feet",
    Unit.METERS: "meters",
    Unit.DBA: "dBA",
    Unit.ACRES: "acres",
    Unit.HOURS_PER_YEAR: "hours per year",
    Unit.ACRES_PER_TURBINE: "acres per turbine",
}

_NUMBER = r"(?P<num>\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+)"


def normalize_unit(raw: str) -> Unit | None:
    cleaned = raw.strip().strip("()[]").strip().rstrip(".").strip().lower()
    cleaned = re.sub(r"\s+", " ", cleaned)
    return _ALIAS_TO_UNIT.get(cleaned)


_ALIASES_LONGEST_FIRST = sorted(_ALIAS_TO_UNIT, key=len, reverse=True)


def _leading_unit(rest: str) -> Unit | None:
    """Unit named at the start of ``rest`` (optionally parenthesized)."""
    rest = re.sub(r"\s+", " ", rest.lstrip().lstrip("(").lstrip()).lower()
    for alias in _ALIASES_LONGEST_FIRST:
        if rest.startswith(alias):
            after = rest[len(alias):len(alias) + 1]
            if not after or not (after.isalnum() or after == "/"):
                return _ALIAS_TO_UNIT[alias]
    return None


def _statement_regex(noun: str) -> re.Pattern:
    noun_re = r"\s+".join(re.escape(w) for w in noun.split())
    return re.compile(
        r"\bthe\s+(?:final\s+)?" + noun_re + r"\s+is\s+(?:approximately\s+|about\s+)?" + _NUMBER + r"(?![\d.,]*\d)",
        re.IGNORECASE,
    )


def _to_float(num: str) -> float:
    return float(num.replace(",", ""))


def parse_value_statement(text: str, noun: str = "setback",
                          units: Iterable[Unit] = LENGTH_UNITS) -> tuple[float, Unit]:
    """Parse ``"The <noun> is <number> <unit>"`` into ``(value, unit)``."""
    allowed = tuple(units)
    m = _statement_regex(noun).search(text)
    if m is None:
        raise SetbackParseError(f"no 'The {noun} is <number> <unit>' statement in {text!r}")
    unit = _leading_unit(text[m.end():])
    if unit is None or unit not in allowed:
        found = text[m.end():m.end() + 30].strip()
        raise SetbackParseError(f"unit in {found!r} is not one of {[u.value for u in allowed]}")
    value = _to_float(m.group("num"))
    if not value > 0:
        raise SetbackParseError(f"non-positive value in {text!r}")
    return value, unit


def parse_setback_statement(text: str) -> tuple[float, Unit]:
    return parse_value_statement(text, "setback", LENGTH_UNITS)


_MULTIPLIER = re.compile(r"\bthe\s+multiplier\s+is\s+(?:approximately\s+)?" + _NUMBER + r"(?!\d)", re.IGNORECASE)


def parse_multiplier_statement(text: str) -> float:
    m = _MULTIPLIER.search(text)
    if m is None:
        raise SetbackParseError(f"no 'The multiplier is <number>' statement in {text!r}")
    value = _to_float(m.group("num"))
    if not value > 0:
        raise SetbackParseError(f"non-positive multiplier in {text!r}")
    return value


def format_number(value: float) -> str:
    """Plain decimal with thousands separators, exact for any float repr."""
    return format(Decimal(repr(float(value))), ",f")


def format_value_statement(value: float, unit: Unit, noun: str = "setback") -> str:
    return f"The {noun} is {format_number(value)} {UNIT_WORDS[unit]}."


def format_setback_statement(value: float, unit: Unit) -> str:
    return format_value_statement(value, unit, "setback")
