"""Declarative concept-mapping rules between meta-models.

A :class:`MappingRuleSet` maps concept names of a source meta-model onto
concept names of a target meta-model.  The bundled sets reproduce the holon
to UEML and holon to IEC 62264 correspondence tables row for row; the
IEC 62264 to holon set is the inversion of the material-model rows.

Rule sets can also be written as text, one rule per line::

    @source HOLONIC
    @target IEC62264
    # comment
    Holon -> MaterialSublot [MaterialModel]
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from ..errors import DuplicateId, MismatchedPair, RulesSyntax, UnmappedConcept, UnsupportedPair

__all__ = [
    "MdaLevel", "MetaModelId", "HOLONIC", "UEML", "IEC62264", "View",
    "MappingRule", "MappingRuleSet", "builtin_ruleset", "map_concept",
    "parse_rules", "load_rules", "format_rules", "InteropReport",
    "check_interoperability", "required_concepts", "meta_model",
]


class MdaLevel(str, Enum):
    M0 = "M0"  # universe of discourse
    M1 = "M1"  # model
    M2 = "M2"  # meta-model
    M3 = "M3"  # meta-meta-model


@dataclass(frozen=True)
class MetaModelId:
    name: str
    mda_level: MdaLevel = MdaLevel.M2

    def __str__(self) -> str:
        return self.name


HOLONIC = MetaModelId("HOLONIC")
UEML = MetaModelId("UEML")
IEC62264 = MetaModelId("IEC62264")
_META_MODELS = {m.name: m for m in (HOLONIC, UEML, IEC62264)}


def meta_model(name: str | MetaModelId) -> MetaModelId:
    if isinstance(name, MetaModelId):
        return name
    try:
        return _META_MODELS[name.upper()]
    except KeyError:
        raise UnsupportedPair(f"unknown meta-model {name!r}; "
                              f"expected one of {', '.join(_META_MODELS)}") from None


class View(str, Enum):
    MATERIAL = "MaterialModel"
    PRODUCT_DEFINITION = "ProductDefinitionModel"


@dataclass(frozen=True)
class MappingRule:
    source_concept: str
    target_concept: str
    view: View | None = None

    def __post_init__(self):
        if not self.source_concept or not self.target_concept:
            raise ValueError("rule concepts must be non-empty")

    def __str__(self) -> str:
        view = f" [{self.view.value}]" if self.view else ""
        return f"{self.source_concept} -> {self.target_concept}{view}"


@dataclass(frozen=True)
class MappingRuleSet:
    source: MetaModelId
    target: MetaModelId
    rules: tuple[MappingRule, ...] = ()
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.source == self.target:
            raise MismatchedPair(f"rule set maps {self.source} onto itself")
        for mm in (self.source, self.target):
            if mm.mda_level is not MdaLevel.M2:
                raise MismatchedPair(f"{mm} is at {mm.mda_level.value}; only M2 meta-models map")
        index = {}
        for r in self.rules:
            if r.source_concept in index:
                raise DuplicateId(f"concept {r.source_concept!r} has two rules")
            index[r.source_concept] = r
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.rules)

    def __contains__(self, concept: str) -> bool:
        return concept in self._index

    def rule(self, concept: str) -> MappingRule:
        return self._index[concept]

    def sources(self) -> list[str]:
        return [r.source_concept for r in self.rules]

    def targets(self) -> list[str]:
        return [r.target_concept for r in self.rules]

    def without(self, concept: str) -> MappingRuleSet:
        return MappingRuleSet(self.source, self.target,
                              tuple(r for r in self.rules if r.source_concept != concept))

    def inverted(self, view: View | None = None) -> MappingRuleSet:
        """Swap direction, optionally keeping only the rules of one view."""
        keep = [r for r in self.rules if view is None or r.view is view]
        return MappingRuleSet(self.target, self.source, tuple(
            MappingRule(r.target_concept, r.source_concept, r.view) for r in keep))


# Holon concepts vs UEML constructs
_HOLONIC_TO_UEML = (
    MappingRule("Holon", "Object"),
    MappingRule("InformationalPart", "InformationObject"),
    MappingRule("PhysicalPart", "MaterialResource"),
    MappingRule("Process", "Activity"),
)

# Holon concepts vs IEC 62264; "Material subplot" normalised to MaterialSublot
_HOLONIC_TO_IEC62264 = (
    MappingRule("Holon", "MaterialSublot", View.MATERIAL),
    MappingRule("HolonFlow", "MaterialLot", View.MATERIAL),
    MappingRule("InformationalPart", "MaterialDefinition", View.MATERIAL),
    MappingRule("PropertiesAndAttributes", "MaterialLotPropertyDefinition", View.MATERIAL),
    MappingRule("ProcessInstance", "ProductSegment", View.PRODUCT_DEFINITION),
    MappingRule("Equipment", "EquipmentSpecification", View.PRODUCT_DEFINITION),
)


def builtin_ruleset(source: str | MetaModelId, target: str | MetaModelId) -> MappingRuleSet:
    source, target = meta_model(source), meta_model(target)
    if (source, target) == (HOLONIC, UEML):
        return MappingRuleSet(HOLONIC, UEML, _HOLONIC_TO_UEML)
    if (source, target) == (HOLONIC, IEC62264):
        return MappingRuleSet(HOLONIC, IEC62264, _HOLONIC_TO_IEC62264)
    if (source, target) == (IEC62264, HOLONIC):
        return MappingRuleSet(HOLONIC, IEC62264, _HOLONIC_TO_IEC62264).inverted(View.MATERIAL)
    raise UnsupportedPair(f"no bundled mapping from {source} to {target}")


def map_concept(ruleset: MappingRuleSet, source_concept: str) -> str:
    try:
        return ruleset.rule(source_concept).target_concept
    except KeyError:
        nearest = difflib.get_close_matches(source_concept, ruleset.sources(), n=3, cutoff=0.4)
        raise UnmappedConcept(source_concept, nearest) from None


# -- text format ------------------------------------------------------------

_RULE_LINE = re.compile(r"^(?P<src>[^\s\[\]]+)\s*->\s*(?P<dst>[^\s\[\]]+)\s*(?:\[(?P<view>[^\]]*)\])?$")


def parse_rules(text: str) -> MappingRuleSet:
    source = target = None
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            key, _, value = line[1:].partition(" ")
            value = value.strip()
            try:
                if key == "source":
                    source = meta_model(value)
                elif key == "target":
                    target = meta_model(value)
                else:
                    raise RulesSyntax(lineno, raw, f"unknown directive @{key}")
            except UnsupportedPair as exc:
                raise RulesSyntax(lineno, raw, str(exc)) from None
            continue
        m = _RULE_LINE.match(line)
        if not m:
            raise RulesSyntax(lineno, raw, "expected 'source -> target [view]'")
        view = None
        if m["view"] is not None:
            try:
                view = View(m["view"].strip())
            except ValueError:
                raise RulesSyntax(lineno, raw, f"unknown view {m['view']!r}") from None
        rules.append(MappingRule(m["src"], m["dst"], view))
    if source is None or target is None:
        raise RulesSyntax(0, "", "rules file needs both @source and @target directives")
    try:
        return MappingRuleSet(source, target, tuple(rules))
    except (DuplicateId, MismatchedPair) as exc:
        raise RulesSyntax(0, "", str(exc)) from None


def load_rules(path) -> MappingRuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def format_rules(ruleset: MappingRuleSet) -> str:
    lines = [f"@source {ruleset.source}", f"@target {ruleset.target}"]
    lines += [str(r) for r in ruleset.rules]
    return "\n".join(lines) + "\n"


# -- interoperability -------------------------------------------------------

@dataclass(frozen=True)
class InteropReport:
    a: MetaModelId
    b: MetaModelId
    interoperable: bool
    uncovered_a: tuple[str, ...]  # concepts of A with no forward rule
    uncovered_b: tuple[str, ...]  # concepts of B with no backward rule

    def summary(self) -> str:
        verdict = "interoperable" if self.interoperable else "NOT interoperable"
        lines = [f"{self.a} <-> {self.b}: {verdict}"]
        if self.uncovered_a:
            lines.append(f"  {self.a} -> {self.b} does not cover: {', '.join(self.uncovered_a)}")
        if self.uncovered_b:
            lines.append(f"  {self.b} -> {self.a} does not cover: {', '.join(self.uncovered_b)}")
        return "\n".join(lines)


def check_interoperability(forward: MappingRuleSet, backward: MappingRuleSet,
                           concepts_a: Iterable[str], concepts_b: Iterable[str]) -> InteropReport:
    """A and B interoperate iff each direction covers its side's concepts."""
    if forward.source != backward.target or forward.target != backward.source:
        raise MismatchedPair(f"forward maps {forward.source}->{forward.target} but backward "
                             f"maps {backward.source}->{backward.target}")
    uncovered_a = tuple(sorted(set(concepts_a) - set(forward.sources())))
    uncovered_b = tuple(sorted(set(concepts_b) - set(backward.sources())))
    return InteropReport(forward.source, forward.target,
                         not uncovered_a and not uncovered_b, uncovered_a, uncovered_b)


def required_concepts(source: MetaModelId, target: MetaModelId,
                      opposite: MappingRuleSet | None = None) -> list[str]:
    """Concepts of ``source`` a mapping towards ``target`` must cover.

    These are the source concepts of the bundled ``source -> target`` set.
    Without a bundled set, they are the concepts the opposite direction
    produces, since whatever arrives in ``source`` must be mappable back.
    """
    try:
        return builtin_ruleset(source, target).sources()
    except UnsupportedPair:
        return sorted(set(opposite.targets())) if opposite is not None else []
