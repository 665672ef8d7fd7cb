"""Build a small holonic product model by hand, validate it, trace it.

Two elementary holons (a flange and an O-ring) are assembled by a drilling
process into a composite holon.  We then look at the lifecycle of one input,
the genealogy of the output, and what the validator says when a structural
rule is broken.

Run:  python demos/01_build_and_validate.py
"""

from dataclasses import replace
from datetime import datetime, timedelta, timezone

from holonic import (
    InformationalPart, Model, OutputSpec, PhysicalPartRef, genealogy, lifecycle,
    topological_order, validate_model,
)

t0 = datetime(2024, 3, 1, 8, 0, tzinfo=timezone.utc)

# %% Elementary holons: one informational part plus one tagged physical part each
m = Model()
m.add_process("drill", "drill", "bore the flange")
m.add_resource("R1", "Human", "Ann")
m.new_elementary_holon(
    "H1", InformationalPart("I1", "flange", {"diameter": (40.0, "mm")}),
    PhysicalPartRef("P1", "SN-001"),
    {"space": {"x": (1.0, "m")}, "shape": {"length": (0.5, "m")}}, t0,
    properties={"hardness": (42, "HRC")})
m.new_elementary_holon(
    "H2", InformationalPart("I2", "Ø-ring"), PhysicalPartRef("P2", "SN-002"),
    {"space": {"x": (2.0, "m")}}, t0 + timedelta(minutes=1))

# %% A process instance consumes the latest states and yields a composite
m.apply_process_instance(
    "drill", [m.latest_state("H1").id, m.latest_state("H2").id],
    [OutputSpec("H3", InformationalPart("I3", "flange assembly"), space={"x": (3.0, "m")})],
    t0 + timedelta(minutes=10), t0 + timedelta(minutes=40),
    ["R1"], equipment=["press-4"], personnel=["R1"])

print("holons:", {h.id: h.kind.value for h in m.holons.values()})
print("H1 lifecycle:")
for s in lifecycle(m, "H1"):
    print(f"  {s.id} at {s.timestamp:%H:%M}  time={dict(s.time_attrs)}")

g = genealogy(m, "H3")
print("H3 genealogy, parents first:", topological_order(g))
for e in sorted(g.edges):
    print(f"  {e.parent} -> {e.child} via {e.via}")

print("\nvalidation of the model as built:")
print(validate_model(m).summary())

# %% Break the mixed-inputs rule behind the API's back and ask again
broken = m.copy()
broken.apply_process_instance("drill", ["H3.s0"], [OutputSpec("H4", InformationalPart("I4"))],
                              t0 + timedelta(minutes=50), t0 + timedelta(minutes=60),
                              instance_id="PI2")
pi = broken.process_instances["PI2"]
broken.process_instances["PI2"] = replace(pi, input_states=pi.input_states + ("H1.s1",))
print("\nvalidation after mixing an elementary input into PI2:")
print(validate_model(broken).summary())
