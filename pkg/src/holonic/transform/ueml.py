"""Holon model -> UEML subset.

Element names come from the holonic-to-UEML rule set, so the emitted
vocabulary is exactly what the rules say: holons become ``Object``
elements classified ``holon``, informational parts ``InformationObject``,
physical parts ``MaterialResource`` and processes ``Activity``.
"""

from __future__ import annotations

from lxml import etree

from ..errors import InvalidModel
from ..model import Model
from ..validation import validate_model
from ..xmlutil import sub
from .documents import UEML_NS, TargetDocument
from .rules import HOLONIC, UEML, MappingRuleSet, builtin_ruleset, map_concept

_P = "{%s}" % UEML_NS


def to_ueml(model: Model, rules: MappingRuleSet | None = None) -> TargetDocument:
    report = validate_model(model)
    if not report.ok:
        raise InvalidModel(report)
    rules = rules or builtin_ruleset(HOLONIC, UEML)
    tag = {c: _P + map_concept(rules, c)
           for c in ("Holon", "InformationalPart", "PhysicalPart", "Process")}

    root = etree.Element(_P + "UemlModel", nsmap={"ueml": UEML_NS})
    holons = [model.holons[k] for k in sorted(model.holons)]

    for h in holons:
        sub(root, tag["Holon"], {
            "id": h.id, "classification": "holon", "kind": h.kind.value,
            "informationObject": h.informational_part.id,
            "materialResource": h.physical_part.id if h.physical_part else None})
    for h in sorted(holons, key=lambda h: h.informational_part.id):
        ip = h.informational_part
        el = sub(root, tag["InformationalPart"], {"id": ip.id})
        if ip.description:
            sub(el, _P + "description", text=ip.description)
    for h in sorted((h for h in holons if h.physical_part), key=lambda h: h.physical_part.id):
        sub(root, tag["PhysicalPart"], {"id": h.physical_part.id, "tag": h.physical_part.tag})

    # activity inputs/outputs aggregate over every execution of the process
    inputs: dict[str, set[str]] = {}
    outputs: dict[str, set[str]] = {}
    for pi in model.process_instances.values():
        if pi.process is None:
            continue
        inputs.setdefault(pi.process, set()).update(model.states[s].holon for s in pi.input_states)
        outputs.setdefault(pi.process, set()).update(pi.output_holons)
    for pid in sorted(model.processes):
        p = model.processes[pid]
        el = sub(root, tag["Process"], {"id": p.id, "name": p.name})
        if p.description:
            sub(el, _P + "description", text=p.description)
        for h in sorted(inputs.get(pid, ())):
            sub(el, _P + "input", {"object": h})
        for h in sorted(outputs.get(pid, ())):
            sub(el, _P + "output", {"object": h})

    return TargetDocument("ueml", root)
