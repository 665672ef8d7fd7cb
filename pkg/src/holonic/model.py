"""In-memory holonic product model.

A :class:`Model` holds one M1 model instance: holons with their state
histories, processes, the process instances that link input states to the
composite holons they produce, resources, and flows.  Holons come in two
kinds.  An *elementary* holon pairs exactly one informational part with one
physical part; a *composite* holon is the output of at least one process
instance and has no physical part of its own.

Mutating operations are methods on :class:`Model` and keep the model valid
(``validate_model(m)`` stays empty for any model built only through them).
The collections are plain dicts so the parser and hand-written fixtures can
populate them directly, bypassing those checks.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateId, MalformedAttribute, MixedInputKinds, NonMonotonicTimestamp,
    TimeOrderViolation, UnknownHolon, UnknownProcess, UnknownResource,
    UnknownStateId,
)
from .values import Text, TypedValue, as_group, as_value, check_id, utc

__all__ = [
    "HolonKind", "ResourceKind", "FlowKind", "InformationalPart",
    "PhysicalPartRef", "State", "Holon", "Process", "ProcessInstance",
    "Resource", "Flow", "Observation", "OutputSpec", "GenealogyEdge",
    "GenealogyGraph", "Model", "genealogy", "genealogy_edges", "lifecycle",
    "topological_order", "CONSUMED_MARKER",
]

#: time-group attribute added to an input holon's post-processing state
CONSUMED_MARKER = "consumed_by"


class HolonKind(str, Enum):
    ELEMENTARY = "Elementary"
    COMPOSITE = "Composite"


class ResourceKind(str, Enum):
    MATERIAL = "Material"
    HUMAN = "Human"


class FlowKind(str, Enum):
    HOLON = "HolonFlow"
    INFORMATIONAL = "InformationalFlow"
    PHYSICAL = "PhysicalFlow"


@dataclass(frozen=True)
class InformationalPart:
    id: str
    description: str = ""
    attributes: dict[str, TypedValue] = field(default_factory=dict)


@dataclass(frozen=True)
class PhysicalPartRef:
    id: str
    tag: str


@dataclass(frozen=True)
class State:
    """Snapshot of a holon: the space, shape and time attribute groups."""

    id: str
    holon: str
    kind: HolonKind
    timestamp: datetime
    space: dict[str, TypedValue] = field(default_factory=dict)
    shape: dict[str, TypedValue] = field(default_factory=dict)
    time_attrs: dict[str, TypedValue] = field(default_factory=dict)

    def groups(self) -> dict[str, dict[str, TypedValue]]:
        return {"space": self.space, "shape": self.shape, "time": self.time_attrs}


@dataclass
class Holon:
    id: str
    kind: HolonKind
    informational_part: InformationalPart | None
    physical_part: PhysicalPartRef | None = None
    properties: dict[str, TypedValue] = field(default_factory=dict)
    state_history: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Process:
    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class ProcessInstance:
    """One execution of a process.

    ``process`` is ``None`` only in models recovered from a B2MML material
    document, where the executed process cannot be reconstructed.
    """

    id: str
    process: str | None
    input_states: tuple[str, ...]
    output_holons: tuple[str, ...]
    start: datetime
    end: datetime
    resources: tuple[str, ...] = ()
    equipment: tuple[str, ...] = ()
    personnel: tuple[str, ...] = ()


@dataclass(frozen=True)
class Resource:
    id: str
    kind: ResourceKind
    name: str = ""


@dataclass(frozen=True)
class Flow:
    id: str
    kind: FlowKind
    members: tuple[str, ...] = ()


@dataclass(frozen=True)
class Observation:
    """Physical-track entry for an elementary holon (see :mod:`holonic.sync`)."""

    id: str
    holon: str
    timestamp: datetime
    space: dict[str, TypedValue] = field(default_factory=dict)
    shape: dict[str, TypedValue] = field(default_factory=dict)
    time_attrs: dict[str, TypedValue] = field(default_factory=dict)
    overridden: bool = False

    def groups(self) -> dict[str, dict[str, TypedValue]]:
        return {"space": self.space, "shape": self.shape, "time": self.time_attrs}


@dataclass
class OutputSpec:
    """Description of one composite holon produced by a process instance."""

    id: str
    informational_part: InformationalPart
    properties: Mapping = field(default_factory=dict)
    space: Mapping = field(default_factory=dict)
    shape: Mapping = field(default_factory=dict)
    time_attrs: Mapping = field(default_factory=dict)


@dataclass(frozen=True, order=True)
class GenealogyEdge:
    parent: str
    child: str
    via: str


@dataclass(frozen=True)
class GenealogyGraph:
    nodes: frozenset[str]
    edges: frozenset[GenealogyEdge]

    def sources(self) -> set[str]:
        return set(self.nodes) - {e.child for e in self.edges}


def _split_groups(attrs) -> tuple[Mapping, Mapping, Mapping]:
    """Accept ``{"space": {...}, "shape": {...}, "time": {...}}`` or ``None``."""
    attrs = dict(attrs or {})
    unknown = set(attrs) - {"space", "shape", "time"}
    if unknown:
        raise MalformedAttribute(
            f"state attributes must be grouped under space/shape/time, got {sorted(unknown)}")
    return attrs.get("space", {}), attrs.get("shape", {}), attrs.get("time", {})


@dataclass
class Model:
    holons: dict[str, Holon] = field(default_factory=dict)
    states: dict[str, State] = field(default_factory=dict)
    processes: dict[str, Process] = field(default_factory=dict)
    process_instances: dict[str, ProcessInstance] = field(default_factory=dict)
    resources: dict[str, Resource] = field(default_factory=dict)
    flows: dict[str, Flow] = field(default_factory=dict)
    # physical track per elementary holon, in ingestion order
    observations: dict[str, list[Observation]] = field(default_factory=dict)
    require_units: bool = field(default=False, compare=False)

    # -- lookups ---------------------------------------------------------

    def holon(self, holon_id: str) -> Holon:
        try:
            return self.holons[holon_id]
        except KeyError:
            raise UnknownHolon(holon_id) from None

    def state(self, state_id: str) -> State:
        try:
            return self.states[state_id]
        except KeyError:
            raise UnknownStateId(state_id) from None

    def latest_state(self, holon_id: str) -> State:
        h = self.holon(holon_id)
        return self.states[h.state_history[-1]]

    def copy(self) -> Model:
        """Copy deep enough that mutating the copy never touches ``self``."""
        return Model(
            holons={k: replace(h, properties=dict(h.properties),
                               state_history=list(h.state_history))
                    for k, h in self.holons.items()},
            states=dict(self.states),
            processes=dict(self.processes),
            process_instances=dict(self.process_instances),
            resources=dict(self.resources),
            flows=dict(self.flows),
            observations={k: list(v) for k, v in self.observations.items()},
            require_units=self.require_units,
        )

    # -- construction ----------------------------------------------------

    def _group(self, attrs) -> dict[str, TypedValue]:
        return as_group(attrs, require_unit=self.require_units)

    def _new_state_id(self, holon_id: str) -> str:
        n = len(self.holons[holon_id].state_history)
        sid = f"{holon_id}.s{n}"
        while sid in self.states:
            n += 1
            sid = f"{holon_id}.s{n}"
        return sid

    def _append_state(self, holon_id: str, kind: HolonKind, ts: datetime,
                      space, shape, time_attrs) -> str:
        sid = self._new_state_id(holon_id)
        self.states[sid] = State(sid, holon_id, kind, ts, space, shape, time_attrs)
        self.holons[holon_id].state_history.append(sid)
        return sid

    def _check_part(self, part: InformationalPart) -> InformationalPart:
        if not isinstance(part, InformationalPart):
            raise TypeError("informational_part must be an InformationalPart")
        check_id(part.id, "informational part id")
        if any(h.informational_part and h.informational_part.id == part.id
               for h in self.holons.values()):
            raise DuplicateId(f"informational part {part.id!r}")
        return replace(part, attributes=self._group(part.attributes))

    def new_elementary_holon(self, id: str, informational_part: InformationalPart,
                             physical_part: PhysicalPartRef, initial_state_attrs=None,
                             t0=None, properties=None) -> Holon:
        """Add an elementary holon with one initial state at ``t0``.

        ``initial_state_attrs`` maps any of ``space``/``shape``/``time`` to an
        attribute mapping; missing groups are empty.
        """
        check_id(id, "holon id")
        if id in self.holons:
            raise DuplicateId(f"holon {id!r}")
        if t0 is None:
            raise TimeOrderViolation("initial timestamp t0 is required")
        t0 = utc(t0)
        if not isinstance(physical_part, PhysicalPartRef):
            raise TypeError("physical_part must be a PhysicalPartRef")
        check_id(physical_part.id, "physical part id")
        if not physical_part.tag:
            raise MalformedAttribute("physical part tag must be non-empty")
        if any(h.physical_part and h.physical_part.id == physical_part.id
               for h in self.holons.values()):
            raise DuplicateId(f"physical part {physical_part.id!r}")
        part = self._check_part(informational_part)
        space, shape, time_attrs = (self._group(g) for g in _split_groups(initial_state_attrs))
        props = self._group(properties)

        holon = Holon(id, HolonKind.ELEMENTARY, part, physical_part, props, [])
        self.holons[id] = holon
        self._append_state(id, HolonKind.ELEMENTARY, t0, space, shape, time_attrs)
        return holon

    def add_process(self, id: str, name: str, description: str = "") -> Process:
        check_id(id, "process id")
        if id in self.processes:
            raise DuplicateId(f"process {id!r}")
        if not name:
            raise MalformedAttribute("process name must be non-empty")
        p = Process(id, name, description)
        self.processes[id] = p
        return p

    def add_resource(self, id: str, kind: ResourceKind | str, name: str = "") -> Resource:
        check_id(id, "resource id")
        if id in self.resources:
            raise DuplicateId(f"resource {id!r}")
        r = Resource(id, ResourceKind(kind), name)
        self.resources[id] = r
        return r

    def add_flow(self, id: str, kind: FlowKind | str, members: Iterable[str] = ()) -> Flow:
        check_id(id, "flow id")
        if id in self.flows:
            raise DuplicateId(f"flow {id!r}")
        kind = FlowKind(kind)
        members = tuple(members)
        known = _flow_member_ids(self, kind)
        for m in members:
            if m not in known:
                raise UnknownHolon(f"{kind.value} member {m!r} is not a known "
                                   f"{_FLOW_MEMBER_LABEL[kind]}")
        f = Flow(id, kind, members)
        self.flows[id] = f
        return f

    def set_property(self, holon_id: str, name: str, value) -> None:
        if not name:
            raise MalformedAttribute("property name must be non-empty")
        self.holon(holon_id).properties[name] = as_value(
            value, name=name, require_unit=self.require_units)

    def record_state(self, holon_id: str, attrs, timestamp) -> str:
        """Append a new state to a holon's lifecycle and return its id."""
        h = self.holon(holon_id)
        ts = utc(timestamp)
        if h.state_history:
            last = self.states[h.state_history[-1]].timestamp
            if ts <= last:
                raise NonMonotonicTimestamp(
                    f"{holon_id}: {ts.isoformat()} is not after last state {last.isoformat()}")
        space, shape, time_attrs = (self._group(g) for g in _split_groups(attrs))
        return self._append_state(holon_id, h.kind, ts, space, shape, time_attrs)

    def apply_process_instance(self, process: str, input_state_ids: Sequence[str],
                               output_specs: Sequence[OutputSpec], start, end,
                               resources: Sequence[str] = (), *,
                               equipment: Sequence[str] = (),
                               personnel: Sequence[str] = (),
                               instance_id: str | None = None) -> list[Holon]:
        """Record one execution of ``process`` and create its output holons.

        Each output spec becomes a composite holon with an initial state at
        ``end``. Every distinct input holon also gets a post-processing state
        at ``end`` that copies the input state's attributes and marks it as
        consumed by this instance.  One input with several outputs models a
        decomposition; several inputs with one output an assembly.
        """
        if process not in self.processes:
            raise UnknownProcess(process)
        start, end = utc(start), utc(end)
        if start > end:
            raise TimeOrderViolation(f"start {start.isoformat()} is after end {end.isoformat()}")
        input_state_ids = tuple(input_state_ids)
        if not input_state_ids:
            raise MalformedAttribute("a process instance needs at least one input state")
        if not output_specs:
            raise MalformedAttribute("a process instance needs at least one output spec")
        inputs = [self.state(s) for s in input_state_ids]
        kinds = {s.kind for s in inputs}
        if len(kinds) != 1:
            raise MixedInputKinds(
                "process instance inputs must be all Elementary or all Composite states")
        for rid in (*resources, *personnel):
            if rid not in self.resources:
                raise UnknownResource(rid)
        for rid in personnel:
            if self.resources[rid].kind is not ResourceKind.HUMAN:
                raise MalformedAttribute(f"personnel {rid!r} must be a Human resource")

        # holons receiving a post-processing state, with the state to copy from
        consumed: dict[str, State] = {}
        for s in inputs:
            consumed.setdefault(s.holon, s)
        for hid in consumed:
            last = self.latest_state(hid).timestamp
            if end <= last:
                raise TimeOrderViolation(
                    f"end {end.isoformat()} is not after {hid}'s last state {last.isoformat()}")

        if instance_id is None:
            n = len(self.process_instances) + 1
            instance_id = f"PI{n}"
            while instance_id in self.process_instances:
                n += 1
                instance_id = f"PI{n}"
        check_id(instance_id, "process instance id")
        if instance_id in self.process_instances:
            raise DuplicateId(f"process instance {instance_id!r}")

        seen: set[str] = set()
        prepared = []
        for spec in output_specs:
            check_id(spec.id, "holon id")
            if spec.id in self.holons or spec.id in seen:
                raise DuplicateId(f"holon {spec.id!r}")
            seen.add(spec.id)
            part = self._check_part(spec.informational_part)
            if any(p.id == part.id for _, p, *_ in prepared):
                raise DuplicateId(f"informational part {part.id!r}")
            prepared.append((spec.id, part, self._group(spec.properties),
                             self._group(spec.space), self._group(spec.shape),
                             self._group(spec.time_attrs)))

        # validation done; mutate
        outputs = []
        for hid, part, props, space, shape, time_attrs in prepared:
            h = Holon(hid, HolonKind.COMPOSITE, part, None, props, [])
            self.holons[hid] = h
            self._append_state(hid, HolonKind.COMPOSITE, end, space, shape, time_attrs)
            outputs.append(h)

        for hid, src in consumed.items():
            time_attrs = dict(src.time_attrs)
            time_attrs[CONSUMED_MARKER] = Text(instance_id)
            self._append_state(hid, src.kind, end, dict(src.space), dict(src.shape), time_attrs)

        self.process_instances[instance_id] = ProcessInstance(
            instance_id, process, input_state_ids, tuple(h.id for h in outputs),
            start, end, tuple(resources), tuple(equipment), tuple(personnel))
        return outputs


_FLOW_MEMBER_LABEL = {
    FlowKind.HOLON: "holon",
    FlowKind.INFORMATIONAL: "informational part",
    FlowKind.PHYSICAL: "physical part",
}


def _flow_member_ids(model: Model, kind: FlowKind) -> set[str]:
    if kind is FlowKind.HOLON:
        return set(model.holons)
    if kind is FlowKind.INFORMATIONAL:
        return {h.informational_part.id for h in model.holons.values() if h.informational_part}
    return {h.physical_part.id for h in model.holons.values() if h.physical_part}


# -- queries -----------------------------------------------------------------

def genealogy_edges(model: Model) -> set[GenealogyEdge]:
    """All (parent, child, via) edges induced by the model's process instances.

    Input states whose id does not resolve are skipped.
    """
    edges = set()
    for pi in model.process_instances.values():
        parents = {model.states[s].holon for s in pi.input_states if s in model.states}
        for p in parents:
            for c in pi.output_holons:
                edges.add(GenealogyEdge(p, c, pi.id))
    return edges


def genealogy(model: Model, holon_id: str) -> GenealogyGraph:
    """Ancestor sub-DAG of ``holon_id``, edges labelled by process instance."""
    model.holon(holon_id)
    incoming: dict[str, list[GenealogyEdge]] = {}
    for e in genealogy_edges(model):
        incoming.setdefault(e.child, []).append(e)

    nodes = {holon_id}
    edges = set()
    stack = [holon_id]
    while stack:
        h = stack.pop()
        for e in incoming.get(h, ()):
            edges.add(e)
            if e.parent not in nodes:
                nodes.add(e.parent)
                stack.append(e.parent)
    return GenealogyGraph(frozenset(nodes), frozenset(edges))


def topological_order(graph: GenealogyGraph) -> list[str]:
    """Parents before children; ties broken by id. Raises ValueError on a cycle."""
    indeg = {n: 0 for n in graph.nodes}
    children: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for e in graph.edges:
        if e.child not in children[e.parent]:
            children[e.parent].add(e.child)
            indeg[e.child] += 1
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(graph.nodes):
        raise ValueError("genealogy graph contains a cycle")
    return order


def lifecycle(model: Model, holon_id: str) -> list[State]:
    """The holon's states, oldest first."""
    h = model.holon(holon_id)
    return [model.state(s) for s in h.state_history]
