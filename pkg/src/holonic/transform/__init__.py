"""Concept-mapping rules and the UEML / B2MML back ends."""

from .b2mml import from_b2mml_material, to_b2mml_material, to_b2mml_product_definition
from .documents import B2MML_NS, DIALECTS, UEML_NS, B2mmlDocument, TargetDocument, UemlDocument
from .rules import (
    HOLONIC, IEC62264, UEML, InteropReport, MappingRule, MappingRuleSet, MdaLevel,
    MetaModelId, View, builtin_ruleset, check_interoperability, format_rules,
    load_rules, map_concept, meta_model, parse_rules, required_concepts,
)
from .ueml import to_ueml

__all__ = [
    "from_b2mml_material", "to_b2mml_material", "to_b2mml_product_definition",
    "to_ueml", "export", "B2MML_NS", "UEML_NS", "DIALECTS", "TargetDocument",
    "UemlDocument", "B2mmlDocument", "HOLONIC", "IEC62264", "UEML",
    "InteropReport", "MappingRule", "MappingRuleSet", "MdaLevel", "MetaModelId",
    "View", "builtin_ruleset", "check_interoperability", "format_rules",
    "load_rules", "map_concept", "meta_model", "parse_rules", "required_concepts",
]


def export(model, dialect: str, *, properties_only: bool = False) -> TargetDocument:
    """Dispatch on a dialect name: ``ueml``, ``b2mml-material`` or ``b2mml-proddef``."""
    if dialect == "ueml":
        return to_ueml(model)
    if dialect == "b2mml-material":
        return to_b2mml_material(model, properties_only=properties_only)
    if dialect == "b2mml-proddef":
        return to_b2mml_product_definition(model)
    raise ValueError(f"unknown dialect {dialect!r}; expected one of {', '.join(DIALECTS)}")
