"""Physical / informational view synchronisation.

Each elementary holon keeps two histories.  Its informational view is the
ordinary state history of :class:`~holonic.model.Model`; its physical view is
a *physical track* of :class:`~holonic.model.Observation` records fed by
:func:`ingest_physical_event`.  :func:`detect_divergence` compares the newest
entry of each track attribute by attribute, and :func:`reconcile` resolves a
divergence under a :class:`ReconciliationPolicy`.

Event logs are JSON Lines, one event per line::

    {"kind": "physical", "timestamp": "2024-01-01T10:00:00Z", "tag": "SN-001",
     "attrs": {"space": {"x": {"value": 2.0, "unit": "m"}}}}
    {"kind": "informational", "timestamp": "2024-01-01T10:00:05Z", "holon": "H1",
     "attrs": {"shape": {"painted": true, "colour": "red"}}}

An attribute value is a JSON number (unitless quantity), a
``{"value": n, "unit": u}`` object, a string or a boolean.  Events are applied
in file order; a log is never re-sorted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable, Mapping, Union

from .errors import (
    AmbiguousTag, EventLogSyntax, HolonicError, NoObservations, NonMonotonicTimestamp,
    NotDivergent, NotElementary, UnknownStateId, UnknownTag,
)
from .model import HolonKind, Model, Observation, _split_groups
from .values import (
    Flag, Quantity, Text, TypedValue, as_group, format_timestamp, parse_timestamp, utc,
)

__all__ = [
    "PhysicalEvent", "InformationalUpdate", "Event", "ReconciliationPolicy",
    "Verdict", "AttributeComparison", "DivergenceReport", "Resolution",
    "ReplaySummary", "ingest_physical_event", "ingest_informational_update",
    "detect_divergence", "reconcile", "replay", "parse_event_log",
    "read_event_log", "format_event", "find_by_tag",
]


@dataclass(frozen=True)
class PhysicalEvent:
    timestamp: datetime
    physical_tag: str
    observed: Mapping = field(default_factory=dict)  # {"space": {...}, "shape": {...}, "time": {...}}


@dataclass(frozen=True)
class InformationalUpdate:
    timestamp: datetime
    holon_id: str
    attrs: Mapping = field(default_factory=dict)


Event = Union[PhysicalEvent, InformationalUpdate]


class ReconciliationPolicy(str, Enum):
    PHYSICAL_WINS = "PhysicalWins"
    INFORMATIONAL_WINS = "InformationalWins"
    MANUAL = "Manual"


class Verdict(str, Enum):
    COHERENT = "Coherent"
    DIVERGENT = "Divergent"


@dataclass(frozen=True)
class AttributeComparison:
    name: str  # qualified, e.g. "space.x"
    physical: TypedValue | None
    informational: TypedValue | None
    delta: float | None  # absolute difference when both sides are comparable quantities
    tolerance: float
    divergent: bool


@dataclass(frozen=True)
class DivergenceReport:
    holon_id: str
    observation_id: str
    state_id: str
    entries: tuple[AttributeComparison, ...]
    verdict: Verdict

    @property
    def divergent(self) -> list[AttributeComparison]:
        return [e for e in self.entries if e.divergent]

    def summary(self) -> str:
        lines = [f"{self.holon_id}: {self.verdict.value} "
                 f"(observation {self.observation_id} vs state {self.state_id})"]
        for e in self.divergent:
            delta = f", delta {e.delta:g} > {e.tolerance:g}" if e.delta is not None else ""
            lines.append(f"  {e.name}: physical={_show(e.physical)} "
                         f"informational={_show(e.informational)}{delta}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Resolution:
    holon_id: str
    policy: ReconciliationPolicy
    status: str  # "Applied" or "Pending"
    report: DivergenceReport
    state_id: str | None = None
    observation_id: str | None = None


def _show(v: TypedValue | None) -> str:
    if v is None:
        return "<absent>"
    if isinstance(v, Quantity):
        return f"{v.value:g} {v.unit}".rstrip()
    if isinstance(v, Flag):
        return str(v.flag).lower()
    return repr(v.text)


# -- ingestion --------------------------------------------------------------

def find_by_tag(model: Model, tag: str) -> str:
    matches = sorted(h.id for h in model.holons.values()
                     if h.physical_part is not None and h.physical_part.tag == tag)
    if not matches:
        raise UnknownTag(tag)
    if len(matches) > 1:
        raise AmbiguousTag(f"tag {tag!r} is carried by {', '.join(matches)}")
    return matches[0]


def ingest_physical_event(model: Model, event: PhysicalEvent) -> str:
    """Append an observation to the physical track; return its id.

    Never touches the informational state history.
    """
    if not event.physical_tag:
        raise UnknownTag("empty physical tag")
    hid = find_by_tag(model, event.physical_tag)
    if model.holons[hid].kind is not HolonKind.ELEMENTARY:
        raise NotElementary(hid)
    ts = utc(event.timestamp)
    track = model.observations.setdefault(hid, [])
    if track and ts <= track[-1].timestamp:
        raise NonMonotonicTimestamp(
            f"{hid}: observation at {format_timestamp(ts)} is not after "
            f"{format_timestamp(track[-1].timestamp)}")
    space, shape, time_attrs = (as_group(g) for g in _split_groups(event.observed))
    oid = f"{hid}.o{len(track)}"
    track.append(Observation(oid, hid, ts, space, shape, time_attrs))
    return oid


def ingest_informational_update(model: Model, update: InformationalUpdate) -> str:
    """Record an informational state; never touches the physical track."""
    return model.record_state(update.holon_id, update.attrs, update.timestamp)


# -- divergence -------------------------------------------------------------

def _tolerance(tolerances: Mapping[str, float], group: str, name: str) -> float:
    for key in (f"{group}.{name}", name):
        if key in tolerances:
            return float(tolerances[key])
    return 0.0


def _compare(name: str, phys, info, tol: float) -> AttributeComparison:
    if phys is None or info is None:
        return AttributeComparison(name, phys, info, None, tol, True)
    if isinstance(phys, Quantity) and isinstance(info, Quantity):
        if phys.unit != info.unit:
            return AttributeComparison(name, phys, info, None, tol, True)
        delta = abs(phys.value - info.value)
        return AttributeComparison(name, phys, info, delta, tol, delta > tol)
    return AttributeComparison(name, phys, info, None, tol, phys != info)


def detect_divergence(model: Model, holon_id: str,
                      tolerances: Mapping[str, float] | None = None) -> DivergenceReport:
    """Compare the latest observation with the latest informational state.

    Observations overridden by an ``InformationalWins`` resolution are
    skipped; when every observation is overridden the holon is Coherent.

    Numbers compare within an absolute tolerance looked up as ``group.name``
    then ``name`` (default 0); text and booleans must be equal; an attribute
    present on one side only is divergent.
    """
    tolerances = tolerances or {}
    h = model.holon(holon_id)
    if h.kind is not HolonKind.ELEMENTARY:
        raise NotElementary(f"{holon_id} is {h.kind.value}; only elementary holons are observed")
    track = model.observations.get(holon_id)
    if not track:
        raise NoObservations(holon_id)
    state = model.latest_state(holon_id)
    live = [o for o in track if not o.overridden]
    if not live:
        return DivergenceReport(holon_id, track[-1].id, state.id, (), Verdict.COHERENT)
    ob = live[-1]

    entries = []
    info_groups = state.groups()
    for group, phys_attrs in ob.groups().items():
        info_attrs = info_groups[group]
        for name in sorted(set(phys_attrs) | set(info_attrs)):
            entries.append(_compare(f"{group}.{name}", phys_attrs.get(name),
                                    info_attrs.get(name), _tolerance(tolerances, group, name)))
    verdict = Verdict.DIVERGENT if any(e.divergent for e in entries) else Verdict.COHERENT
    return DivergenceReport(holon_id, ob.id, state.id, tuple(entries), verdict)


def reconcile(model: Model, holon_id: str, report: DivergenceReport,
              policy: ReconciliationPolicy | str, now: datetime | None = None) -> Resolution:
    """Resolve a divergent report.

    ``PhysicalWins`` appends an informational state that copies the latest
    observation, stamped ``now`` or, by default, the later of the
    observation time and one millisecond after the last state, so replays
    stay deterministic.  ``InformationalWins`` marks the observation as
    overridden.  ``Manual`` changes nothing and leaves the resolution pending.
    """
    policy = ReconciliationPolicy(policy)
    model.holon(holon_id)
    if report.verdict is not Verdict.DIVERGENT:
        raise NotDivergent(holon_id)
    track = model.observations.get(holon_id)
    if not track:
        raise NoObservations(holon_id)
    idx = next((i for i, o in enumerate(track) if o.id == report.observation_id), None)
    if idx is None:
        raise UnknownStateId(f"report refers to unknown observation {report.observation_id!r}")
    ob = track[idx]

    if policy is ReconciliationPolicy.MANUAL:
        return Resolution(holon_id, policy, "Pending", report)

    if policy is ReconciliationPolicy.INFORMATIONAL_WINS:
        track[idx] = replace(ob, overridden=True)
        return Resolution(holon_id, policy, "Applied", report, observation_id=ob.id)

    if now is None:
        last = model.latest_state(holon_id).timestamp
        now = max(ob.timestamp, last + timedelta(milliseconds=1))
    sid = model.record_state(holon_id, {"space": dict(ob.space), "shape": dict(ob.shape),
                                        "time": dict(ob.time_attrs)}, now)
    return Resolution(holon_id, policy, "Applied", report, state_id=sid)


# -- replay -----------------------------------------------------------------

@dataclass
class ReplaySummary:
    applied: int = 0
    divergences: int = 0
    reconciled: int = 0
    pending: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)  # (event number, reason)
    observed: set[str] = field(default_factory=set)

    def __str__(self) -> str:
        head = (f"{self.applied} event{'' if self.applied == 1 else 's'} applied, "
                f"{self.divergences} divergence"
                f"{'' if self.divergences == 1 else 's'}, {self.reconciled} reconciled")
        if self.pending:
            head += f", {self.pending} pending"
        lines = [head, f"{len(self.rejected)} rejected"]
        lines += [f"  event {n}: {reason}" for n, reason in self.rejected]
        return "\n".join(lines)


def replay(model: Model, events: Iterable[Event],
           policy: ReconciliationPolicy | str = ReconciliationPolicy.PHYSICAL_WINS,
           tolerances: Mapping[str, float] | None = None) -> ReplaySummary:
    """Apply events in order, checking and reconciling after each one.

    Events that fail (unknown tag, out-of-order timestamp, ...) are recorded
    as rejected and skipped.  The model is mutated in place.
    """
    policy = ReconciliationPolicy(policy)
    summary = ReplaySummary()
    for n, event in enumerate(events, 1):
        try:
            if isinstance(event, PhysicalEvent):
                ingest_physical_event(model, event)
                hid = find_by_tag(model, event.physical_tag)
            else:
                ingest_informational_update(model, event)
                hid = event.holon_id
        except HolonicError as exc:
            summary.rejected.append((n, f"{type(exc).__name__}: {exc}"))
            continue
        summary.applied += 1
        if model.holons[hid].kind is not HolonKind.ELEMENTARY or not model.observations.get(hid):
            continue
        summary.observed.add(hid)
        report = detect_divergence(model, hid, tolerances)
        if report.verdict is Verdict.DIVERGENT:
            summary.divergences += 1
            resolution = reconcile(model, hid, report, policy)
            if resolution.status == "Applied":
                summary.reconciled += 1
            else:
                summary.pending += 1
    return summary


# -- event log format -------------------------------------------------------

def _decode_value(v, where: str) -> TypedValue:
    if isinstance(v, bool):
        return Flag(v)
    if isinstance(v, (int, float)):
        return Quantity(v, "")
    if isinstance(v, str):
        return Text(v)
    if isinstance(v, dict) and set(v) <= {"value", "unit"} and "value" in v \
            and isinstance(v["value"], (int, float)) and not isinstance(v["value"], bool):
        return Quantity(v["value"], str(v.get("unit", "")))
    raise EventLogSyntax(f"{where}: unsupported attribute value {v!r}")


def _encode_value(v: TypedValue):
    if isinstance(v, Quantity):
        return {"value": v.value, "unit": v.unit} if v.unit else v.value
    if isinstance(v, Flag):
        return v.flag
    return v.text


def _decode_attrs(raw, where: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict) or set(raw) - {"space", "shape", "time"}:
        raise EventLogSyntax(f"{where}: attrs must map space/shape/time to objects")
    out = {}
    for group, attrs in raw.items():
        if not isinstance(attrs, dict):
            raise EventLogSyntax(f"{where}: attrs.{group} must be an object")
        out[group] = {k: _decode_value(v, f"{where} {group}.{k}") for k, v in attrs.items()}
    return out


def parse_event_log(text: str) -> list[Event]:
    events: list[Event] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        where = f"line {lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EventLogSyntax(f"{where}: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise EventLogSyntax(f"{where}: expected a JSON object")
        try:
            ts = parse_timestamp(str(obj["timestamp"]))
        except KeyError:
            raise EventLogSyntax(f"{where}: missing timestamp") from None
        except ValueError as exc:
            raise EventLogSyntax(f"{where}: {exc}") from None
        attrs = _decode_attrs(obj.get("attrs"), where)
        kind = obj.get("kind")
        if kind == "physical":
            if not isinstance(obj.get("tag"), str) or not obj["tag"]:
                raise EventLogSyntax(f"{where}: physical event needs a non-empty tag")
            events.append(PhysicalEvent(ts, obj["tag"], attrs))
        elif kind == "informational":
            if not isinstance(obj.get("holon"), str) or not obj["holon"]:
                raise EventLogSyntax(f"{where}: informational update needs a holon id")
            events.append(InformationalUpdate(ts, obj["holon"], attrs))
        else:
            raise EventLogSyntax(f"{where}: kind must be 'physical' or 'informational'")
    return events


def read_event_log(path) -> list[Event]:
    with open(path, encoding="utf-8") as fh:
        return parse_event_log(fh.read())


def format_event(event: Event) -> str:
    attrs_src = event.observed if isinstance(event, PhysicalEvent) else event.attrs
    attrs = {g: {k: _encode_value(v) for k, v in sorted(as_group(a).items())}
             for g, a in attrs_src.items()}
    obj = {"kind": "physical" if isinstance(event, PhysicalEvent) else "informational",
           "timestamp": format_timestamp(event.timestamp)}
    if isinstance(event, PhysicalEvent):
        obj["tag"] = event.physical_tag
    else:
        obj["holon"] = event.holon_id
    obj["attrs"] = attrs
    return json.dumps(obj, ensure_ascii=False)
