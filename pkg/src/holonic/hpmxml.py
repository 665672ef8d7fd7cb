"""HPM-XML: the canonical on-disk format of a :class:`~holonic.model.Model`.

The grammar is the bundled ``schemas/hpm-1.xsd`` (namespace
``urn:hpm:model:1``) and is described in ``docs/hpm-xml.md``.  Emission is
canonical: entities are sorted by id inside their section and attributes are
written in alphabetical order, so equal models give byte-identical files.
"""

from __future__ import annotations

from lxml import etree

from .errors import DanglingRef, InvalidModel, SchemaViolation, UnknownNamespace, XmlSyntax
from .model import (
    FlowKind, Holon, HolonKind, InformationalPart, Model, Observation,
    PhysicalPartRef, Process, ProcessInstance, Resource, ResourceKind, State,
    Flow, _flow_member_ids,
)
from .validation import Severity, ValidationReport, Violation, validate_model
from .values import (
    Flag, Quantity, Text, TypedValue, format_number, format_timestamp,
    parse_timestamp,
)
from .xmlutil import local, parse_bytes, schema_errors, sub, to_bytes

__all__ = ["HPM_NS", "emit_hpm", "parse_hpm", "check_document", "read_hpm", "write_hpm"]

HPM_NS = "urn:hpm:model:1"
_P = "{%s}" % HPM_NS
SECTIONS = ("holons", "states", "processes", "processInstances", "resources", "flows")


# -- values -----------------------------------------------------------------

def _value_attrs(name: str, value: TypedValue) -> dict:
    if isinstance(value, Quantity):
        return {"name": name, "type": "number", "unit": value.unit,
                "value": format_number(value.value)}
    if isinstance(value, Text):
        return {"name": name, "type": "text", "value": value.text}
    if isinstance(value, Flag):
        return {"name": name, "type": "boolean", "value": "true" if value.flag else "false"}
    raise TypeError(f"not a typed value: {value!r}")


def _read_value(el: etree._Element) -> tuple[str, TypedValue]:
    name, kind, raw = el.get("name"), el.get("type"), el.get("value")
    if kind == "number":
        try:
            value = float(raw)
        except ValueError:
            raise SchemaViolation(f"attribute {name!r}: {raw!r} is not a number") from None
        if value != value or value in (float("inf"), float("-inf")):
            raise SchemaViolation(f"attribute {name!r}: non-finite number")
        return name, Quantity(value, el.get("unit", ""))
    if el.get("unit") is not None:
        raise SchemaViolation(f"attribute {name!r}: unit is only allowed on numbers")
    if kind == "boolean":
        if raw not in ("true", "false"):
            raise SchemaViolation(f"attribute {name!r}: {raw!r} is not true/false")
        return name, Flag(raw == "true")
    return name, Text(raw)


def _write_group(parent, tag: str, group: dict[str, TypedValue], elem: str = "attr"):
    holder = sub(parent, tag) if tag else parent
    for name in sorted(group):
        sub(holder, _P + elem, _value_attrs(name, group[name]))
    return holder


def _read_group(holder, elem: str = "attr") -> dict[str, TypedValue]:
    group: dict[str, TypedValue] = {}
    for el in holder.iterchildren(_P + elem):
        name, value = _read_value(el)
        if name in group:
            raise SchemaViolation(f"attribute {name!r} appears twice in one group")
        group[name] = value
    return group


# -- emit -------------------------------------------------------------------

def emit_hpm(model: Model) -> bytes:
    """Serialise ``model``; raises :class:`InvalidModel` if it has errors."""
    report = validate_model(model)
    if not report.ok:
        raise InvalidModel(report)
    return to_bytes(_build_tree(model))


def _build_tree(model: Model) -> etree._Element:
    root = etree.Element(_P + "model", nsmap={"hpm": HPM_NS})
    sec = {name: sub(root, _P + name) for name in SECTIONS}

    for hid in sorted(model.holons):
        h = model.holons[hid]
        el = sub(sec["holons"], _P + "holon", {"id": h.id, "kind": h.kind.value})
        ip = h.informational_part
        ip_el = sub(el, _P + "informationalPart", {"id": ip.id})
        if ip.description:
            sub(ip_el, _P + "description", text=ip.description)
        _write_group(ip_el, None, ip.attributes)
        if h.physical_part is not None:
            sub(el, _P + "physicalPart", {"id": h.physical_part.id, "tag": h.physical_part.tag})
        _write_group(el, None, h.properties, "property")
        for sid in h.state_history:
            sub(el, _P + "stateRef", {"ref": sid})

    for sid in sorted(model.states):
        s = model.states[sid]
        el = sub(sec["states"], _P + "state", {
            "id": s.id, "holon": s.holon, "kind": s.kind.value,
            "timestamp": format_timestamp(s.timestamp)})
        for tag, group in s.groups().items():
            _write_group(el, _P + tag, group)

    for pid in sorted(model.processes):
        p = model.processes[pid]
        el = sub(sec["processes"], _P + "process", {"id": p.id, "name": p.name})
        if p.description:
            sub(el, _P + "description", text=p.description)

    for iid in sorted(model.process_instances):
        pi = model.process_instances[iid]
        el = sub(sec["processInstances"], _P + "processInstance", {
            "id": pi.id, "process": pi.process,
            "start": format_timestamp(pi.start), "end": format_timestamp(pi.end)})
        for s in pi.input_states:
            sub(el, _P + "input", {"state": s})
        for h in pi.output_holons:
            sub(el, _P + "output", {"holon": h})
        for r in pi.resources:
            sub(el, _P + "resource", {"ref": r})
        for e in pi.equipment:
            sub(el, _P + "equipment", {"name": e})
        for r in pi.personnel:
            sub(el, _P + "personnel", {"ref": r})

    for rid in sorted(model.resources):
        r = model.resources[rid]
        sub(sec["resources"], _P + "resource", {"id": r.id, "kind": r.kind.value,
                                               "name": r.name or None})

    for fid in sorted(model.flows):
        f = model.flows[fid]
        el = sub(sec["flows"], _P + "flow", {"id": f.id, "kind": f.kind.value})
        for m in f.members:
            sub(el, _P + "member", {"ref": m})

    tracks = {h: t for h, t in model.observations.items() if t}
    if tracks:
        obs = sub(root, _P + "observations")
        for hid in sorted(tracks):
            for ob in tracks[hid]:
                el = sub(obs, _P + "observation", {
                    "id": ob.id, "holon": ob.holon,
                    "timestamp": format_timestamp(ob.timestamp),
                    "overridden": "true" if ob.overridden else None})
                for tag, group in ob.groups().items():
                    _write_group(el, _P + tag, group)
    return root


# -- parse ------------------------------------------------------------------

def _load(data: bytes) -> etree._Element:
    root = parse_bytes(data)
    ns = etree.QName(root).namespace
    if ns != HPM_NS:
        raise UnknownNamespace(f"root namespace {ns!r} is not {HPM_NS!r}")
    errors = schema_errors(root, "hpm")
    if errors:
        raise SchemaViolation(f"document does not match the HPM-XML grammar: {errors[0]}", errors)
    return root


def _ts(el, attr):
    try:
        return parse_timestamp(el.get(attr))
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from None


def _children(el, tag):
    return el.iterchildren(_P + tag)


def _build_model(root: etree._Element) -> tuple[Model, list[tuple[str, str]]]:
    """Turn a schema-valid tree into a model plus a list of dangling refs."""
    m = Model()
    section = {local(el): el for el in root.iterchildren(etree.Element)}

    for el in _children(section["holons"], "holon"):
        ip_el = el.find(_P + "informationalPart")
        desc = ip_el.find(_P + "description")
        ip = InformationalPart(ip_el.get("id"), (desc.text or "") if desc is not None else "",
                               _read_group(ip_el))
        pp_el = el.find(_P + "physicalPart")
        pp = PhysicalPartRef(pp_el.get("id"), pp_el.get("tag")) if pp_el is not None else None
        hist = [r.get("ref") for r in _children(el, "stateRef")]
        m.holons[el.get("id")] = Holon(el.get("id"), HolonKind(el.get("kind")), ip, pp,
                                       _read_group(el, "property"), hist)

    for el in _children(section["states"], "state"):
        s = State(el.get("id"), el.get("holon"), HolonKind(el.get("kind")), _ts(el, "timestamp"),
                  *(_read_group(el.find(_P + g)) for g in ("space", "shape", "time")))
        m.states[s.id] = s

    for el in _children(section["processes"], "process"):
        desc = el.find(_P + "description")
        p = Process(el.get("id"), el.get("name"), (desc.text or "") if desc is not None else "")
        m.processes[p.id] = p

    for el in _children(section["processInstances"], "processInstance"):
        pi = ProcessInstance(
            el.get("id"), el.get("process"),
            tuple(c.get("state") for c in _children(el, "input")),
            tuple(c.get("holon") for c in _children(el, "output")),
            _ts(el, "start"), _ts(el, "end"),
            tuple(c.get("ref") for c in _children(el, "resource")),
            tuple(c.get("name") for c in _children(el, "equipment")),
            tuple(c.get("ref") for c in _children(el, "personnel")))
        m.process_instances[pi.id] = pi

    for el in _children(section["resources"], "resource"):
        r = Resource(el.get("id"), ResourceKind(el.get("kind")), el.get("name", ""))
        m.resources[r.id] = r

    for el in _children(section["flows"], "flow"):
        f = Flow(el.get("id"), FlowKind(el.get("kind")),
                 tuple(c.get("ref") for c in _children(el, "member")))
        m.flows[f.id] = f

    if "observations" in section:
        for el in _children(section["observations"], "observation"):
            ob = Observation(el.get("id"), el.get("holon"), _ts(el, "timestamp"),
                             *(_read_group(el.find(_P + g)) for g in ("space", "shape", "time")),
                             overridden=el.get("overridden") in ("true", "1"))
            m.observations.setdefault(ob.holon, []).append(ob)

    return m, _dangling(m)


def _dangling(m: Model) -> list[tuple[str, str]]:
    out = []
    for h in m.holons.values():
        out += [(s, f"holon {h.id}") for s in h.state_history if s not in m.states]
    for s in m.states.values():
        if s.holon not in m.holons:
            out.append((s.holon, f"state {s.id}"))
    for pi in m.process_instances.values():
        where = f"process instance {pi.id}"
        if pi.process is not None and pi.process not in m.processes:
            out.append((pi.process, where))
        out += [(s, where) for s in pi.input_states if s not in m.states]
        out += [(h, where) for h in pi.output_holons if h not in m.holons]
        out += [(r, where) for r in (*pi.resources, *pi.personnel) if r not in m.resources]
    for f in m.flows.values():
        known = _flow_member_ids(m, f.kind)
        out += [(x, f"flow {f.id}") for x in f.members if x not in known]
    for hid in m.observations:
        if hid not in m.holons:
            out.append((hid, "observations"))
    return out


def parse_hpm(data: bytes) -> Model:
    """Parse an HPM-XML document into a model with referential integrity.

    Raises :class:`XmlSyntax`, :class:`UnknownNamespace`,
    :class:`SchemaViolation` or :class:`DanglingRef`.
    """
    model, dangling = _build_model(_load(data))
    if dangling:
        raise DanglingRef(*dangling[0])
    return model


def check_document(data: bytes) -> ValidationReport:
    """Validate a document end to end; never raises on malformed input."""
    def fail(rule, message):
        return ValidationReport([Violation(Severity.ERROR, rule, "document", message)])

    try:
        model, _ = _build_model(_load(data))
    except XmlSyntax as exc:
        return fail("XmlSyntax", str(exc))
    except UnknownNamespace as exc:
        return fail("UnknownNamespace", str(exc))
    except SchemaViolation as exc:
        details = exc.details or [str(exc)]
        return ValidationReport([Violation(Severity.ERROR, "SchemaViolation", "document", d)
                                 for d in details])
    except Exception as exc:  # totality: any input yields a report
        return fail("SchemaViolation", str(exc))
    return validate_model(model)


def read_hpm(path) -> Model:
    with open(path, "rb") as fh:
        return parse_hpm(fh.read())


def write_hpm(model: Model, path) -> None:
    data = emit_hpm(model)
    with open(path, "wb") as fh:
        fh.write(data)
