"""Decision trees for the 13 wind siting features.

Setback features (structures, property lines, roads, ...) follow the
structures tree used for the Monroe County example:

    presence --yes--> classify --#1.1--> single_kind --#2.1--> setback_statement
                                                     --#3.1..#6.1--> multiplier_statement
                               --#7.1--> multi_work --> multi_select --> setback_statement
                               --#0----> needs_review
             --no---> not_found
             --only small systems--> small_systems_review

Value-limit features (noise, height, lot size, flicker, density) use the same
skeleton without the turbine arithmetic, ending in ``value_statement``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ordex.ordinance.schema import DEFAULT_TURBINE, FeatureType, ReferenceTurbine, SetbackKind, Unit
from ordex.ordinance.setback import format_number
from ordex.tree.conditions import Always, Option, Regex
from ordex.tree.graph import ConversationGraph, Edge, PromptNode

NOT_FOUND = "not_found"
NEEDS_REVIEW = "needs_review"
SMALL_SYSTEMS_REVIEW = "small_systems_review"
SETBACK_STATEMENT = "setback_statement"
MULTIPLIER_STATEMENT = "multiplier_statement"
VALUE_STATEMENT = "value_statement"

REVIEW_LEAVES = frozenset({NEEDS_REVIEW, SMALL_SYSTEMS_REVIEW})
KIND_BINDING = "kind"


@dataclass(frozen=True)
class FeatureWording:
    focus: str  # one sentence placed in the system preamble
    target: str  # what the setback is measured to, or what is limited
    short: str = ""
    noun: str = ""  # value-limit features: "noise limit", ...
    units: tuple[Unit, ...] = (Unit.FEET, Unit.METERS)
    unit_hint: str = "units"


_STRUCTURES = "buildings, structures, and/or residences"

WORDING: dict[FeatureType, FeatureWording] = {
    FeatureType.STRUCTURES_PARTICIPATING: FeatureWording(
        "We are interested in setbacks from structures on participating properties, meaning "
        "properties whose owners are part of the wind energy project.",
        _STRUCTURES, "buildings and structures"),
    FeatureType.STRUCTURES_NONPARTICIPATING: FeatureWording(
        "We are interested in setbacks from structures on non-participating properties, meaning "
        "properties whose owners are not part of the wind energy project.",
        _STRUCTURES, "buildings and structures"),
    FeatureType.PROPERTY_LINE_PARTICIPATING: FeatureWording(
        "We are interested in setbacks from the property lines of participating properties.",
        "property lines", "property lines"),
    FeatureType.PROPERTY_LINE_NONPARTICIPATING: FeatureWording(
        "We are interested in setbacks from the property lines of non-participating properties.",
        "property lines", "property lines"),
    FeatureType.ROADS: FeatureWording(
        "We are interested in setbacks from public roads, streets, and highways.",
        "roads, streets, and/or highways", "roads"),
    FeatureType.RAILROADS: FeatureWording(
        "We are interested in setbacks from railroads and railroad rights-of-way.",
        "railroads", "railroads"),
    FeatureType.TRANSMISSION_LINES: FeatureWording(
        "We are interested in setbacks from overhead electrical transmission lines.",
        "overhead electrical transmission lines", "transmission lines"),
    FeatureType.BODIES_OF_WATER: FeatureWording(
        "We are interested in setbacks from lakes, rivers, streams, wetlands, and other bodies of water.",
        "lakes, rivers, streams, wetlands, and/or other bodies of water", "bodies of water"),
    FeatureType.NOISE: FeatureWording(
        "We are interested in limits on the noise or sound level produced by wind energy systems.",
        "a maximum noise or sound level for wind energy systems",
        noun="noise limit", units=(Unit.DBA,), unit_hint="dBA"),
    FeatureType.MAX_SYSTEM_HEIGHT: FeatureWording(
        "We are interested in the maximum allowed height of wind energy systems.",
        "a maximum height for wind energy systems",
        noun="maximum height", units=(Unit.FEET, Unit.METERS), unit_hint="feet or meters"),
    FeatureType.MIN_LOT_SIZE: FeatureWording(
        "We are interested in the minimum lot or parcel size required for wind energy systems.",
        "a minimum lot or parcel size for wind energy systems",
        noun="minimum lot size", units=(Unit.ACRES,), unit_hint="acres"),
    FeatureType.SHADOW_FLICKER: FeatureWording(
        "We are interested in limits on shadow flicker caused by wind turbine blades.",
        "a limit on shadow flicker from wind energy systems",
        noun="shadow flicker limit", units=(Unit.HOURS_PER_YEAR,), unit_hint="hours per year"),
    FeatureType.TURBINE_DENSITY: FeatureWording(
        "We are interested in limits on how densely wind turbines may be placed, such as a "
        "minimum number of acres per turbine.",
        "a limit on the density of wind turbines",
        noun="turbine density limit", units=(Unit.ACRES_PER_TURBINE,), unit_hint="acres per turbine"),
}

SYSTEM_TEMPLATE = (
    "You are a legal scholar that reads ordinance text and answers questions about the siting "
    "of wind energy systems. {focus} Only consider rules for large or utility-scale wind energy "
    "systems. Ignore rules that apply only to small, medium, private, or residential wind "
    "turbines; if the text only regulates small or medium wind energy systems, say so. Base "
    "every answer only on the legal text below.\n\n"
    'Legal text:\n"""\n{{text}}\n"""'
)

PRESENCE_SETBACK = (
    "Is there text in the legal document that describes how close i can site or how far i have to "
    'setback wind energy systems to {target}? Please only say "Yes" or "No".'
)
PRESENCE_VALUE = 'Is there text in the legal document that describes {target}? Please only say "Yes" or "No".'

CLASSIFY_SETBACK = (
    "Based on your last message, choose the option that best describes the required setback from {target}:\n"
    "\n"
    "- #1.1 The setback from {short} is a single distance value\n"
    "- #7.1 The setback from {short} has multiple conditions such as a fixed distance and a multiple "
    "of the total system height\n"
    "- #0 None of the above options are descriptive of this ordinance related to setbacks from {short}"
)

SINGLE_KIND = (
    "Based on the ordinance text, choose the option that best describes how the single setback "
    "from {short} is defined:\n"
    "\n"
    "- #2.1 A fixed distance, such as 1,000 feet\n"
    "- #3.1 A multiple of the maximum blade tip height (total system height)\n"
    "- #4.1 A multiple of the hub height\n"
    "- #5.1 A multiple of the rotor diameter\n"
    "- #6.1 A multiple of the hub height plus the rotor diameter\n"
    "- #0 None of the above options are descriptive of this ordinance related to setbacks from {short}"
)

MULTI_WORK = (
    "Lets assume the supporting tower is {hub} feet with blades {blade} feet long. So the rotor "
    "diameter would be {rotor} feet and the total system height would be {tip} feet. What would "
    "the multiple setback distances be? Please show your work."
)
MULTI_SELECT = (
    "What is the final setback value? If the ordinance states which of the multiple distances "
    "should be chosen, use that guidance. Otherwise, choose the largest setback value."
)
SETBACK_FORMAT = 'State the final setback like this: "The setback is XXX (units)"'
MULTIPLIER_FORMAT = (
    "What multiple is required by the ordinance? "
    'State the multiplier like this: "The multiplier is XXX"'
)

CLASSIFY_VALUE = (
    "Based on your last message, choose the option that best describes the {noun} for wind energy systems:\n"
    "\n"
    "- #1.1 The {noun} is a single value\n"
    "- #7.1 The {noun} has multiple conditions or values to choose from\n"
    "- #0 None of the above options are descriptive of this ordinance related to the {noun}"
)
VALUE_SELECT = (
    "What is the final {noun}? If the ordinance states which of the multiple values should be "
    "chosen, use that guidance. Otherwise, choose the most restrictive value."
)
VALUE_FORMAT = 'State the final {noun} like this: "The {noun} is XXX ({unit_hint})"'

_YES = Regex(r"^\W*yes\b")
_NO = Regex(r"^\W*no\b")
_SMALL_ONLY = Regex(r"\bonly\b[^.]*\b(small|medium|private|residential)\b")

MULTIPLIER_OPTIONS = (
    ("3.1", SetbackKind.TIP_HEIGHT_MULTIPLIER),
    ("4.1", SetbackKind.HUB_HEIGHT_MULTIPLIER),
    ("5.1", SetbackKind.ROTOR_DIAMETER_MULTIPLIER),
    ("6.1", SetbackKind.HUB_PLUS_ROTOR_MULTIPLIER),
)


def _kind(kind: SetbackKind) -> dict[str, str]:
    return {KIND_BINDING: kind.value}


def _presence_edges() -> list[Edge]:
    return [
        Edge("presence", SMALL_SYSTEMS_REVIEW, _SMALL_ONLY, "only small systems regulated"),
        Edge("presence", "classify", _YES, "yes"),
        Edge("presence", NOT_FOUND, _NO, "no"),
    ]


def _setback_tree(feature: FeatureType, w: FeatureWording, turbine: ReferenceTurbine) -> ConversationGraph:
    work = MULTI_WORK.format(
        hub=format_number(turbine.hub_height_ft).removesuffix(".0"),
        blade=format_number(turbine.blade_length_ft).removesuffix(".0"),
        rotor=format_number(turbine.rotor_diameter_ft).removesuffix(".0"),
        tip=format_number(turbine.tip_height_ft).removesuffix(".0"),
    )
    nodes = [
        PromptNode("presence", PRESENCE_SETBACK.format(target=w.target)),
        PromptNode("classify", CLASSIFY_SETBACK.format(target=w.target, short=w.short)),
        PromptNode("single_kind", SINGLE_KIND.format(short=w.short)),
        PromptNode("multi_work", work),
        PromptNode("multi_select", MULTI_SELECT),
        PromptNode(SETBACK_STATEMENT, SETBACK_FORMAT),
        PromptNode(MULTIPLIER_STATEMENT, MULTIPLIER_FORMAT),
        PromptNode(NOT_FOUND),
        PromptNode(NEEDS_REVIEW),
        PromptNode(SMALL_SYSTEMS_REVIEW),
    ]
    edges = _presence_edges() + [
        Edge("classify", "single_kind", Option("1.1"), "single value"),
        Edge("classify", "multi_work", Option("7.1"), "multiple conditions", _kind(SetbackKind.MULTI_CONDITION)),
        Edge("classify", NEEDS_REVIEW, Option("0"), "none of the above"),
        Edge("single_kind", SETBACK_STATEMENT, Option("2.1"), "fixed distance", _kind(SetbackKind.FIXED_DISTANCE)),
        *(
            Edge("single_kind", MULTIPLIER_STATEMENT, Option(num), kind.value, _kind(kind))
            for num, kind in MULTIPLIER_OPTIONS
        ),
        Edge("single_kind", NEEDS_REVIEW, Option("0"), "none of the above"),
        Edge("multi_work", "multi_select", Always(), "distances computed"),
        Edge("multi_select", SETBACK_STATEMENT, Always(), "value selected"),
    ]
    system = SYSTEM_TEMPLATE.format(focus=w.focus)
    return ConversationGraph(tuple(nodes), tuple(edges), "presence", system, feature.value)


def _value_tree(feature: FeatureType, w: FeatureWording) -> ConversationGraph:
    nodes = [
        PromptNode("presence", PRESENCE_VALUE.format(target=w.target)),
        PromptNode("classify", CLASSIFY_VALUE.format(noun=w.noun)),
        PromptNode("value_select", VALUE_SELECT.format(noun=w.noun)),
        PromptNode(VALUE_STATEMENT, VALUE_FORMAT.format(noun=w.noun, unit_hint=w.unit_hint)),
        PromptNode(NOT_FOUND),
        PromptNode(NEEDS_REVIEW),
        PromptNode(SMALL_SYSTEMS_REVIEW),
    ]
    edges = _presence_edges() + [
        Edge("classify", VALUE_STATEMENT, Option("1.1"), "single value", _kind(SetbackKind.FIXED_DISTANCE)),
        Edge("classify", "value_select", Option("7.1"), "multiple values", _kind(SetbackKind.MULTI_CONDITION)),
        Edge("classify", NEEDS_REVIEW, Option("0"), "none of the above"),
        Edge("value_select", VALUE_STATEMENT, Always(), "value selected"),
    ]
    system = SYSTEM_TEMPLATE.format(focus=w.focus)
    return ConversationGraph(tuple(nodes), tuple(edges), "presence", system, feature.value)


def build_wind_tree(feature: FeatureType | str, turbine: ReferenceTurbine = DEFAULT_TURBINE) -> ConversationGraph:
    feature = FeatureType(feature)
    wording = WORDING[feature]
    if feature.is_setback:
        return _setback_tree(feature, wording, turbine)
    return _value_tree(feature, wording)
