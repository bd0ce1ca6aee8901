from ordex.ordinance.extract import ExtractionConfig, extract_feature, extract_ordinances, record_from_outcome
from ordex.ordinance.schema import (
    DEFAULT_TURBINE,
    FEET_PER_METER,
    Combinator,
    FeatureType,
    OrdinanceRecord,
    RecordStatus,
    ReferenceTurbine,
    SetbackKind,
    SetbackSpec,
    Unit,
)
from ordex.ordinance.setback import (
    effective_setback,
    format_setback_statement,
    parse_multiplier_statement,
    parse_setback_statement,
    parse_value_statement,
)
from ordex.ordinance.trees import build_wind_tree

__all__ = [
    "DEFAULT_TURBINE", "FEET_PER_METER", "Combinator", "ExtractionConfig", "FeatureType", "OrdinanceRecord",
    "RecordStatus", "ReferenceTurbine", "SetbackKind", "SetbackSpec", "Unit", "build_wind_tree",
    "effective_setback", "extract_feature", "extract_ordinances", "format_setback_statement",
    "parse_multiplier_statement", "parse_setback_statement", "parse_value_statement", "record_from_outcome",
]
