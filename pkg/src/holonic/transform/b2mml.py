"""Holon model <-> B2MML (IEC 62264) subsets.

Material model
    Every holon becomes a ``MaterialSublot``; every holon flow a
    ``MaterialLot`` holding its members' sublots (holons outside any holon
    flow go to the synthetic lot ``__unassigned__``); informational parts
    become ``MaterialDefinition`` elements.  Holon properties are written as
    ``MaterialLotProperty`` entries.  Besides the user's properties a sublot
    carries reserved entries:

    * ``hpm.physicalPart.id`` / ``hpm.physicalPart.tag`` for elementary holons,
    * ``state.timestamp`` and ``state.<group>.<name>`` for the latest state
      (left out with ``properties_only=True``).

    Genealogy is kept as ``AssemblySublotID`` children naming the parent
    sublot, with the producing process instance in ``segmentID``.

Product definition model
    Every process instance becomes a ``ProductSegment`` with its duration,
    one ``EquipmentSpecification`` per equipment entry, one
    ``PersonnelSpecification`` per human resource and a
    ``MaterialSpecification`` per material resource, consumed and produced
    holon.
"""

from __future__ import annotations

from datetime import datetime, timezone

from lxml import etree

from ..errors import AmbiguousSublot, InvalidModel, MalformedAttribute, SchemaViolation, XmlSyntax
from ..model import (
    Flow, FlowKind, Holon, HolonKind, InformationalPart, Model, PhysicalPartRef,
    ProcessInstance, ResourceKind, State, genealogy_edges,
)
from ..validation import validate_model
from ..values import (
    Flag, Quantity, Text, TypedValue, format_duration, format_number,
    format_timestamp, parse_timestamp,
)
from ..xmlutil import parse_bytes, schema_errors, sub
from .documents import B2MML_NS, TargetDocument
from .rules import HOLONIC, IEC62264, MappingRuleSet, builtin_ruleset, map_concept

__all__ = ["to_b2mml_material", "to_b2mml_product_definition", "from_b2mml_material",
           "UNASSIGNED_LOT", "RESERVED_PREFIXES"]

_P = "{%s}" % B2MML_NS
UNASSIGNED_LOT = "__unassigned__"
PHYSICAL_ID = "hpm.physicalPart.id"
PHYSICAL_TAG = "hpm.physicalPart.tag"
STATE_TIMESTAMP = "state.timestamp"
RESERVED_PREFIXES = ("hpm.", "state.")
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_GROUP_FIELDS = {"space": "space", "shape": "shape", "time": "time_attrs"}


def _require_valid(model: Model) -> None:
    report = validate_model(model)
    if not report.ok:
        raise InvalidModel(report)


def _write_value(parent, value: TypedValue) -> None:
    v = sub(parent, _P + "Value")
    if isinstance(value, Quantity):
        sub(v, _P + "ValueString", text=format_number(value.value))
        sub(v, _P + "DataType", text="decimal")
        sub(v, _P + "UnitOfMeasure", text=value.unit)
    elif isinstance(value, Flag):
        sub(v, _P + "ValueString", text="true" if value.flag else "false")
        sub(v, _P + "DataType", text="boolean")
    else:
        sub(v, _P + "ValueString", text=value.text)
        sub(v, _P + "DataType", text="string")


def _read_value(el) -> TypedValue:
    v = el.find(_P + "Value")
    raw = v.findtext(_P + "ValueString") or ""
    kind = v.findtext(_P + "DataType")
    if kind == "decimal":
        try:
            return Quantity(float(raw), v.findtext(_P + "UnitOfMeasure") or "")
        except ValueError:
            raise SchemaViolation(f"{raw!r} is not a decimal") from None
    if kind == "boolean":
        if raw not in ("true", "false"):
            raise SchemaViolation(f"{raw!r} is not a boolean")
        return Flag(raw == "true")
    return Text(raw)


def _write_properties(parent, tag: str, props: dict[str, TypedValue]) -> None:
    for name in sorted(props):
        el = sub(parent, tag)
        sub(el, _P + "ID", text=name)
        _write_value(el, props[name])


# -- material model ---------------------------------------------------------

def _sublot_properties(model: Model, h: Holon, properties_only: bool) -> dict[str, TypedValue]:
    clash = sorted(n for n in h.properties if n.startswith(RESERVED_PREFIXES))
    if clash:
        raise MalformedAttribute(f"holon {h.id}: property {clash[0]!r} uses a reserved prefix")
    props = dict(h.properties)
    if h.physical_part is not None:
        props[PHYSICAL_ID] = Text(h.physical_part.id)
        props[PHYSICAL_TAG] = Text(h.physical_part.tag)
    if not properties_only:
        state = model.latest_state(h.id)
        props[STATE_TIMESTAMP] = Text(format_timestamp(state.timestamp))
        for group, attrs in state.groups().items():
            for name, value in attrs.items():
                props[f"state.{group}.{name}"] = value
    return props


def _lot_assignment(model: Model) -> list[tuple[str, list[str]]]:
    owner: dict[str, str] = {}
    lots = []
    for fid in sorted(model.flows):
        f = model.flows[fid]
        if f.kind is not FlowKind.HOLON:
            continue
        if fid == UNASSIGNED_LOT:
            raise SchemaViolation(f"flow id {UNASSIGNED_LOT!r} is reserved")
        for hid in f.members:
            if hid in owner:
                raise AmbiguousSublot(
                    f"holon {hid} is a member of {owner[hid]} and {fid}; "
                    "a sublot can belong to one lot only")
            owner[hid] = fid
        lots.append((fid, list(f.members)))
    rest = sorted(h for h in model.holons if h not in owner)
    if rest:
        lots.append((UNASSIGNED_LOT, rest))
    return lots


def to_b2mml_material(model: Model, *, properties_only: bool = False,
                      rules: MappingRuleSet | None = None) -> TargetDocument:
    """Material-model document; genealogy rides on sublot assembly references."""
    _require_valid(model)
    rules = rules or builtin_ruleset(HOLONIC, IEC62264)
    tag = {c: _P + map_concept(rules, c) for c in ("Holon", "HolonFlow", "InformationalPart")}
    prop_tag = _P + "MaterialLotProperty"

    parents: dict[str, list] = {}
    for e in sorted(genealogy_edges(model), key=lambda e: (e.via, e.parent)):
        parents.setdefault(e.child, []).append(e)

    root = etree.Element(_P + "MaterialInformation", nsmap={"b2mml": B2MML_NS})
    parts = sorted((h.informational_part for h in model.holons.values()), key=lambda p: p.id)
    for ip in parts:
        el = sub(root, tag["InformationalPart"])
        sub(el, _P + "ID", text=ip.id)
        if ip.description:
            sub(el, _P + "Description", text=ip.description)
        _write_properties(el, _P + "MaterialDefinitionProperty", ip.attributes)

    for lot_id, members in _lot_assignment(model):
        lot = sub(root, tag["HolonFlow"])
        sub(lot, _P + "ID", text=lot_id)
        for hid in members:
            h = model.holons[hid]
            sl = sub(lot, tag["Holon"])
            sub(sl, _P + "ID", text=h.id)
            sub(sl, _P + "MaterialDefinitionID", text=h.informational_part.id)
            _write_properties(sl, prop_tag, _sublot_properties(model, h, properties_only))
            for e in parents.get(hid, ()):
                sub(sl, _P + "AssemblySublotID", {"segmentID": e.via}, text=e.parent)

    return TargetDocument("b2mml-material", root)


def _material_root(doc) -> etree._Element:
    if isinstance(doc, TargetDocument):
        root = doc.root
    elif isinstance(doc, etree._Element):
        root = doc
    else:
        try:
            root = parse_bytes(doc)
        except XmlSyntax as exc:
            raise SchemaViolation(f"not well-formed XML: {exc}") from None
    q = etree.QName(root)
    if q.namespace != B2MML_NS or q.localname != "MaterialInformation":
        raise SchemaViolation(f"expected b2mml:MaterialInformation, got {root.tag}")
    errors = schema_errors(root, "b2mml-material")
    if errors:
        raise SchemaViolation(f"not a valid B2MML material document: {errors[0]}", errors)
    return root


def from_b2mml_material(doc) -> Model:
    """Recover the material-model image of a holon model.

    Holons, informational parts, holon properties, holon flows and the
    genealogy come back.  Processes and resources are not represented in the
    material model; each genealogy segment is restored as a process instance
    with no process, and each holon gets a single state rebuilt from its
    ``state.*`` entries (epoch timestamp when absent).
    """
    root = _material_root(doc)

    parts: dict[str, InformationalPart] = {}
    for el in root.iterchildren(_P + "MaterialDefinition"):
        attrs = {p.findtext(_P + "ID"): _read_value(p)
                 for p in el.iterchildren(_P + "MaterialDefinitionProperty")}
        parts[el.findtext(_P + "ID")] = InformationalPart(
            el.findtext(_P + "ID"), el.findtext(_P + "Description") or "", attrs)

    sublots: dict[str, etree._Element] = {}
    lots: list[tuple[str, list[str]]] = []
    for lot in root.iterchildren(_P + "MaterialLot"):
        lot_id = lot.findtext(_P + "ID")
        members = []
        for sl in lot.iterchildren(_P + "MaterialSublot"):
            sid = sl.findtext(_P + "ID")
            if sid in sublots:
                raise AmbiguousSublot(f"sublot {sid} appears in more than one lot")
            sublots[sid] = sl
            members.append(sid)
        lots.append((lot_id, members))

    # (parent, child, segment) triples
    edges = []
    for child, sl in sublots.items():
        for ref in sl.iterchildren(_P + "AssemblySublotID"):
            parent = (ref.text or "").strip()
            if parent not in sublots:
                raise SchemaViolation(f"sublot {child} assembles unknown sublot {parent!r}")
            edges.append((parent, child, ref.get("segmentID")))
    composites = {c for _, c, _ in edges}

    m = Model()
    for hid, sl in sublots.items():
        props: dict[str, TypedValue] = {}
        reserved: dict[str, TypedValue] = {}
        for p in sl.iterchildren(_P + "MaterialLotProperty"):
            name = p.findtext(_P + "ID")
            target = reserved if name.startswith(RESERVED_PREFIXES) else props
            if name in target:
                raise SchemaViolation(f"sublot {hid}: property {name!r} listed twice")
            target[name] = _read_value(p)

        kind = HolonKind.COMPOSITE if hid in composites else HolonKind.ELEMENTARY
        physical = None
        if PHYSICAL_ID in reserved and PHYSICAL_TAG in reserved:
            physical = PhysicalPartRef(_text(reserved[PHYSICAL_ID]), _text(reserved[PHYSICAL_TAG]))
        def_id = sl.findtext(_P + "MaterialDefinitionID")
        part = parts.get(def_id)
        if part is None:
            raise SchemaViolation(f"sublot {hid} references unknown definition {def_id!r}")

        ts = _EPOCH
        if STATE_TIMESTAMP in reserved:
            try:
                ts = parse_timestamp(_text(reserved[STATE_TIMESTAMP]))
            except ValueError as exc:
                raise SchemaViolation(str(exc)) from None
        groups = {"space": {}, "shape": {}, "time_attrs": {}}
        for name, value in reserved.items():
            prefix, _, rest = name.partition(".")
            group, _, attr = rest.partition(".")
            if prefix == "state" and group in _GROUP_FIELDS and attr:
                groups[_GROUP_FIELDS[group]][attr] = value

        sid = f"{hid}.s0"
        m.holons[hid] = Holon(hid, kind, part, physical, props, [sid])
        m.states[sid] = State(sid, hid, kind, ts, **groups)

    by_segment: dict[str, tuple[set, set]] = {}
    for parent, child, seg in edges:
        ins, outs = by_segment.setdefault(seg, (set(), set()))
        ins.add(parent)
        outs.add(child)
    for seg in sorted(by_segment):
        ins, outs = by_segment[seg]
        when = max(m.states[f"{h}.s0"].timestamp for h in outs)
        m.process_instances[seg] = ProcessInstance(
            seg, None, tuple(f"{h}.s0" for h in sorted(ins)), tuple(sorted(outs)), when, when)

    for lot_id, members in lots:
        if lot_id != UNASSIGNED_LOT:
            m.flows[lot_id] = Flow(lot_id, FlowKind.HOLON, tuple(members))
    return m


def _text(v: TypedValue) -> str:
    if isinstance(v, Text):
        return v.text
    if isinstance(v, Quantity):
        return format_number(v.value)
    return "true" if v.flag else "false"


# -- product definition model -----------------------------------------------

def to_b2mml_product_definition(model: Model, *,
                                rules: MappingRuleSet | None = None) -> TargetDocument:
    _require_valid(model)
    rules = rules or builtin_ruleset(HOLONIC, IEC62264)
    segment_tag = _P + map_concept(rules, "ProcessInstance")
    equipment_tag = _P + map_concept(rules, "Equipment")

    root = etree.Element(_P + "ProductDefinition", nsmap={"b2mml": B2MML_NS})
    sub(root, _P + "ID", text="holonic-product-definition")
    for iid in sorted(model.process_instances):
        pi = model.process_instances[iid]
        seg = sub(root, segment_tag)
        sub(seg, _P + "ID", text=pi.id)
        if pi.process is not None:
            process = model.processes[pi.process]
            if process.name:
                sub(seg, _P + "Description", text=process.name)
            sub(seg, _P + "ProcessSegmentID", text=process.id)
        sub(seg, _P + "Duration", text=format_duration(pi.end - pi.start))

        people, materials = [], []
        for rid in dict.fromkeys((*pi.personnel, *pi.resources)):
            r = model.resources[rid]
            (people if r.kind is ResourceKind.HUMAN else materials).append(r)
        for r in people:
            ps = sub(seg, _P + "PersonnelSpecification")
            sub(ps, _P + "PersonID", text=r.id)
            if r.name:
                sub(ps, _P + "Description", text=r.name)
        for name in pi.equipment:
            es = sub(seg, equipment_tag)
            sub(es, _P + "EquipmentID", text=name)
        for r in materials:
            ms = sub(seg, _P + "MaterialSpecification")
            sub(ms, _P + "MaterialClassID", text=r.id)
            if r.name:
                sub(ms, _P + "Description", text=r.name)
            sub(ms, _P + "MaterialUse", text="Consumable")
        consumed = dict.fromkeys(model.states[s].holon for s in pi.input_states)
        for use, holons in (("Consumed", consumed), ("Produced", pi.output_holons)):
            for hid in holons:
                ms = sub(seg, _P + "MaterialSpecification")
                sub(ms, _P + "MaterialDefinitionID", text=model.holons[hid].informational_part.id)
                sub(ms, _P + "MaterialUse", text=use)
    return TargetDocument("b2mml-proddef", root)
