"""Structural validation of a :class:`~holonic.model.Model`.

:func:`validate_model` never raises on a bad model: every broken constraint
becomes a :class:`Violation` in the returned :class:`ValidationReport`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .model import FlowKind, HolonKind, Model, ResourceKind, _flow_member_ids, genealogy_edges

__all__ = ["Severity", "Violation", "ValidationReport", "validate_model", "RULES"]


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"


#: every rule name the validator can report
RULES = (
    "ElementaryPartCardinality", "CompositeHasProcess", "MixedInputKinds",
    "DanglingRef", "GenealogyCycle", "StateOrder", "StateKind", "HolonKind",
    "ResourceKind", "FlowKind", "TimeOrder", "OutputNotComposite",
    "ProcessInstanceArity", "DuplicatePartId", "EmptyName", "ObservationTrack",
    "DuplicateTag", "XmlSyntax", "UnknownNamespace", "SchemaViolation",
)


@dataclass(frozen=True, order=True)
class Violation:
    severity: Severity
    rule: str
    entity: str
    message: str = ""

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.rule} [{self.entity}] {self.message}".rstrip()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity is Severity.ERROR]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity is Severity.WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def summary(self) -> str:
        lines = [str(v) for v in self.violations]
        ne, nw = len(self.errors), len(self.warnings)
        lines.append(f"{ne} error{'' if ne == 1 else 's'}, {nw} warning{'' if nw == 1 else 's'}")
        return "\n".join(lines)


class _Collector:
    def __init__(self):
        self.items: list[Violation] = []

    def error(self, rule, entity, message=""):
        self.items.append(Violation(Severity.ERROR, rule, entity, message))

    def warning(self, rule, entity, message=""):
        self.items.append(Violation(Severity.WARNING, rule, entity, message))


def validate_model(model: Model) -> ValidationReport:
    out = _Collector()
    _check_holons(model, out)
    _check_states(model, out)
    _check_process_instances(model, out)
    _check_resources_and_processes(model, out)
    _check_flows(model, out)
    _check_observations(model, out)
    _check_cycles(model, out)
    return ValidationReport(sorted(set(out.items), key=lambda v: (
        v.severity is not Severity.ERROR, v.entity, v.rule, v.message)))


def _check_holons(model: Model, out: _Collector) -> None:
    produced = {h for pi in model.process_instances.values() for h in pi.output_holons}
    info_ids: dict[str, str] = {}
    phys_ids: dict[str, str] = {}
    tags: dict[str, str] = {}

    for hid, h in model.holons.items():
        if h.id != hid:
            out.error("DanglingRef", hid, f"holon stored under {hid!r} has id {h.id!r}")
        if not isinstance(h.kind, HolonKind):
            out.error("HolonKind", hid, f"kind {h.kind!r} is neither Elementary nor Composite")
            continue

        if h.informational_part is None:
            out.error("ElementaryPartCardinality", hid, "holon has no informational part")
        else:
            pid = h.informational_part.id
            if not pid:
                out.error("ElementaryPartCardinality", hid, "informational part id is empty")
            elif pid in info_ids:
                out.error("DuplicatePartId", hid,
                          f"informational part {pid!r} also used by {info_ids[pid]}")
            else:
                info_ids[pid] = hid

        if h.kind is HolonKind.ELEMENTARY:
            if h.physical_part is None:
                out.error("ElementaryPartCardinality", hid, "elementary holon has no physical part")
            else:
                pp = h.physical_part
                if not pp.tag:
                    out.error("ElementaryPartCardinality", hid, "physical part tag is empty")
                if pp.id in phys_ids:
                    out.error("DuplicatePartId", hid,
                              f"physical part {pp.id!r} also used by {phys_ids[pp.id]}")
                else:
                    phys_ids[pp.id] = hid
                if pp.tag and pp.tag in tags:
                    out.warning("DuplicateTag", hid,
                                f"physical tag {pp.tag!r} also used by {tags[pp.tag]}")
                else:
                    tags[pp.tag] = hid
        else:
            if h.physical_part is not None:
                out.error("ElementaryPartCardinality", hid,
                          "composite holon must not carry its own physical part")
            if hid not in produced:
                out.error("CompositeHasProcess", hid,
                          "composite holon is not the output of any process instance")

        if not h.state_history:
            out.error("StateOrder", hid, "holon has no recorded state")
        prev = None
        for sid in h.state_history:
            s = model.states.get(sid)
            if s is None:
                out.error("DanglingRef", sid, f"state history of {hid} references unknown state")
                continue
            if s.holon != hid:
                out.error("StateOrder", sid, f"state belongs to {s.holon}, listed in history of {hid}")
            if s.kind is not h.kind:
                out.error("StateKind", sid, f"{s.kind} state on {h.kind.value} holon {hid}")
            if prev is not None and s.timestamp <= prev:
                out.error("StateOrder", sid, f"timestamp not after previous state of {hid}")
            prev = s.timestamp
        if len(set(h.state_history)) != len(h.state_history):
            out.error("StateOrder", hid, "state history lists a state twice")


def _check_states(model: Model, out: _Collector) -> None:
    for sid, s in model.states.items():
        if s.holon not in model.holons:
            out.error("DanglingRef", sid, f"state references unknown holon {s.holon!r}")
        elif sid not in model.holons[s.holon].state_history:
            out.warning("StateOrder", sid, f"state is missing from the history of {s.holon}")


def _check_process_instances(model: Model, out: _Collector) -> None:
    for pid, pi in model.process_instances.items():
        if pi.process is not None and pi.process not in model.processes:
            out.error("DanglingRef", pid, f"unknown process {pi.process!r}")
        if not pi.input_states or not pi.output_holons:
            out.error("ProcessInstanceArity", pid,
                      "process instance needs at least one input state and one output holon")
        if pi.start > pi.end:
            out.error("TimeOrder", pid, "start is after end")

        kinds = set()
        for sid in pi.input_states:
            s = model.states.get(sid)
            if s is None:
                out.error("DanglingRef", pid, f"unknown input state {sid!r}")
            else:
                kinds.add(s.kind)
        if len(kinds) > 1:
            out.error("MixedInputKinds", pid, "inputs mix Elementary and Composite states")

        for hid in pi.output_holons:
            h = model.holons.get(hid)
            if h is None:
                out.error("DanglingRef", pid, f"unknown output holon {hid!r}")
            elif h.kind is not HolonKind.COMPOSITE:
                out.error("OutputNotComposite", pid, f"output holon {hid} is not Composite")

        for rid in pi.resources:
            if rid not in model.resources:
                out.error("DanglingRef", pid, f"unknown resource {rid!r}")
        for rid in pi.personnel:
            r = model.resources.get(rid)
            if r is None:
                out.error("DanglingRef", pid, f"unknown personnel {rid!r}")
            elif r.kind is not ResourceKind.HUMAN:
                out.error("ResourceKind", pid, f"personnel {rid} is not a Human resource")


def _check_resources_and_processes(model: Model, out: _Collector) -> None:
    for rid, r in model.resources.items():
        if not isinstance(r.kind, ResourceKind):
            out.error("ResourceKind", rid, f"kind {r.kind!r} is neither Material nor Human")
    for pid, p in model.processes.items():
        if not p.name:
            out.error("EmptyName", pid, "process name is empty")


def _check_flows(model: Model, out: _Collector) -> None:
    for fid, f in model.flows.items():
        if not isinstance(f.kind, FlowKind):
            out.error("FlowKind", fid, f"unknown flow kind {f.kind!r}")
            continue
        known = _flow_member_ids(model, f.kind)
        for m in f.members:
            if m not in known:
                out.error("DanglingRef", fid, f"{f.kind.value} member {m!r} does not resolve")


def _check_observations(model: Model, out: _Collector) -> None:
    for hid, track in model.observations.items():
        h = model.holons.get(hid)
        if h is None:
            out.error("DanglingRef", hid, "physical track for unknown holon")
            continue
        if h.kind is not HolonKind.ELEMENTARY:
            out.error("ObservationTrack", hid, "only elementary holons have a physical track")
        prev = None
        for ob in track:
            if ob.holon != hid:
                out.error("ObservationTrack", ob.id, f"observation belongs to {ob.holon}")
            if prev is not None and ob.timestamp <= prev:
                out.error("StateOrder", ob.id, "observation timestamp not after previous one")
            prev = ob.timestamp


def _check_cycles(model: Model, out: _Collector) -> None:
    children: dict[str, set[str]] = {}
    for e in genealogy_edges(model):
        children.setdefault(e.parent, set()).add(e.child)

    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(model.holons, WHITE)
    reported = set()
    for root in sorted(children):
        if colour.get(root, WHITE) != WHITE:
            continue
        # iterative DFS; stack holds (node, iterator over children)
        colour[root] = GREY
        stack = [(root, iter(sorted(children.get(root, ()))))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = BLACK
                stack.pop()
                continue
            c = colour.get(nxt, WHITE)
            if c == GREY:
                if nxt not in reported:
                    reported.add(nxt)
                    out.error("GenealogyCycle", nxt, f"{nxt} is its own ancestor (via {node})")
            elif c == WHITE:
                colour[nxt] = GREY
                stack.append((nxt, iter(sorted(children.get(nxt, ())))))
