"""Seeded random models and event logs for property tests and demos.

Models are built only through the :class:`~holonic.model.Model` API, so
every generated model is valid by construction.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from .model import FlowKind, HolonKind, InformationalPart, Model, OutputSpec, PhysicalPartRef
from .sync import Event, InformationalUpdate, PhysicalEvent
from .values import Flag, Quantity, Text

__all__ = ["random_model", "random_event_log", "model_horizon"]

BASE_TIME = datetime(2024, 1, 1, 8, 0, tzinfo=timezone.utc)

_TEXTS = ["bolt", "Ø-ring", "nut M8", "café", "日本製", "a < b & c", 'say "hi"',
          "  padded  ", "line\nbreak", "tab\there", ""]
_UNITS = ["m", "mm", "kg", "s", "HRC", ""]
_NAMES = {
    "space": ["x", "y", "z", "cell", "bin"],
    "shape": ["length", "diameter", "mass", "colour", "painted"],
    "time": ["elapsed", "shift", "batch", "inspected"],
}
_PROPERTY_NAMES = ["hardness", "grade", "supplier", "certified", "lot_note", "torque"]


def _value(rng: random.Random):
    r = rng.random()
    if r < 0.55:
        # mix of integral, short decimal and full-precision floats
        v = rng.choice([rng.randint(-50, 500), round(rng.uniform(-10, 10), 3),
                        rng.uniform(-1e6, 1e6)])
        return Quantity(v, rng.choice(_UNITS))
    if r < 0.85:
        return Text(rng.choice(_TEXTS))
    return Flag(rng.random() < 0.5)


def _group(rng: random.Random, group: str, k: int | None = None) -> dict:
    names = _NAMES[group]
    k = rng.randint(0, 3) if k is None else k
    return {n: _value(rng) for n in rng.sample(names, min(k, len(names)))}


def _state_attrs(rng: random.Random) -> dict:
    return {g: _group(rng, g) for g in ("space", "shape", "time")}


def _properties(rng: random.Random) -> dict:
    return {n: _value(rng) for n in rng.sample(_PROPERTY_NAMES, rng.randint(0, 3))}


def random_model(rng: random.Random | int, max_holons: int = 20) -> Model:
    """A valid model with at most ``max_holons`` holons."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    m = Model()
    clock = BASE_TIME

    def tick(lo=1, hi=600):
        nonlocal clock
        clock += timedelta(seconds=rng.randint(lo, hi), milliseconds=rng.randint(0, 999))
        return clock

    for i in range(rng.randint(1, 3)):
        m.add_process(f"proc{i}", rng.choice(["drill", "assemble", "paint", "cut", "Schweißen"]),
                      rng.choice(["", "station A", "Ø bore"]))
    for i in range(rng.randint(0, 4)):
        m.add_resource(f"R{i}", rng.choice(["Material", "Human"]), rng.choice(["", "Ann", "steel"]))
    humans = [r.id for r in m.resources.values() if r.kind.value == "Human"]

    n = 0
    for _ in range(rng.randint(0, min(8, max_holons))):
        n += 1
        m.new_elementary_holon(
            f"H{n}", InformationalPart(f"I{n}", rng.choice(_TEXTS), _group(rng, "shape")),
            PhysicalPartRef(f"P{n}", f"SN-{n:03d}"), _state_attrs(rng), tick(),
            properties=_properties(rng))

    while n < max_holons and m.holons and rng.random() < 0.75:
        if rng.random() < 0.3:
            m.record_state(rng.choice(sorted(m.holons)), _state_attrs(rng), tick())
            continue
        by_kind = {k: sorted(h.id for h in m.holons.values() if h.kind is k) for k in HolonKind}
        pool = rng.choice([v for v in by_kind.values() if v])
        inputs = rng.sample(pool, rng.randint(1, min(3, len(pool))))
        k_out = min(rng.randint(1, 2), max_holons - n)
        specs = []
        for _ in range(k_out):
            n += 1
            specs.append(OutputSpec(f"H{n}", InformationalPart(f"I{n}", rng.choice(_TEXTS)),
                                    _properties(rng), **{
                                        "space": _group(rng, "space"),
                                        "shape": _group(rng, "shape"),
                                        "time_attrs": _group(rng, "time")}))
        start = tick()
        m.apply_process_instance(
            rng.choice(sorted(m.processes)), [m.latest_state(h).id for h in inputs], specs,
            start, tick(), rng.sample(sorted(m.resources), rng.randint(0, len(m.resources))),
            equipment=rng.sample(["press-4", "lathe 2", "robot-α"], rng.randint(0, 2)),
            personnel=rng.sample(humans, rng.randint(0, len(humans))))
        tick()

    holons = sorted(m.holons)
    unassigned = holons[:]
    rng.shuffle(unassigned)
    for i in range(rng.randint(0, 3)):
        take = rng.randint(0, len(unassigned))
        members, unassigned = unassigned[:take], unassigned[take:]
        m.add_flow(f"HF{i}", FlowKind.HOLON, members)
    infos = sorted(h.informational_part.id for h in m.holons.values())
    physicals = sorted(h.physical_part.id for h in m.holons.values() if h.physical_part)
    if infos and rng.random() < 0.5:
        m.add_flow("IF0", FlowKind.INFORMATIONAL, rng.sample(infos, rng.randint(1, len(infos))))
    if physicals and rng.random() < 0.5:
        m.add_flow("PF0", FlowKind.PHYSICAL, rng.sample(physicals, rng.randint(1, len(physicals))))
    return m


def model_horizon(model: Model) -> datetime:
    """Latest timestamp anywhere in the model."""
    stamps = [s.timestamp for s in model.states.values()]
    stamps += [pi.end for pi in model.process_instances.values()]
    stamps += [o.timestamp for t in model.observations.values() for o in t]
    return max(stamps, default=BASE_TIME)


def _perturb(rng: random.Random, attrs: dict) -> dict:
    """Copy of grouped attrs with one injected discrepancy."""
    out = {g: dict(a) for g, a in attrs.items()}
    group = rng.choice(["space", "shape", "time"])
    names = list(out[group])
    r = rng.random()
    if names and r < 0.6:
        name = rng.choice(names)
        v = out[group][name]
        if isinstance(v, Quantity):
            out[group][name] = Quantity(v.value + rng.choice([0.05, -0.2, 1.5, 100.0]), v.unit)
        elif isinstance(v, Flag):
            out[group][name] = Flag(not v.flag)
        else:
            out[group][name] = Text(v.text + "*")
    elif names and r < 0.8:
        del out[group][rng.choice(names)]
    else:
        out[group][rng.choice(_NAMES[group]) + "_extra"] = _value(rng)
    return out


def random_event_log(rng: random.Random | int, model: Model, n_events: int = 30,
                     discrepancy_rate: float = 0.3) -> list[Event]:
    """Physical and informational events for the model's elementary holons.

    Physical observations mirror the current informational state except
    for injected discrepancies; timestamps strictly increase through the log.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    elementary = sorted(h.id for h in model.holons.values() if h.kind is HolonKind.ELEMENTARY)
    if not elementary:
        return []
    clock = model_horizon(model)
    # mirror of each holon's informational attributes as the log unfolds
    current = {h: {g: dict(a) for g, a in model.latest_state(h).groups().items()}
               for h in elementary}
    events: list[Event] = []
    for _ in range(n_events):
        clock += timedelta(seconds=rng.randint(1, 120))
        hid = rng.choice(elementary)
        if rng.random() < 0.65:
            attrs = current[hid]
            if rng.random() < discrepancy_rate:
                attrs = _perturb(rng, attrs)
            events.append(PhysicalEvent(clock, model.holons[hid].physical_part.tag, attrs))
        else:
            attrs = _perturb(rng, current[hid]) if rng.random() < 0.5 else current[hid]
            current[hid] = attrs
            events.append(InformationalUpdate(clock, hid, attrs))
    return events
