"""Concept mappings between meta-models and the interoperability check.

Two meta-models interoperate when the forward mapping covers every concept
of the first and the backward mapping covers every concept of the second.
Deleting any single rule from the bundled pair must break that.

Run:  python demos/04_interoperability.py
"""

from holonic import HOLONIC, IEC62264, UEML, builtin_ruleset, check_interoperability, map_concept
from holonic.errors import UnmappedConcept
from holonic.transform import format_rules

for pair in [(HOLONIC, UEML), (HOLONIC, IEC62264), (IEC62264, HOLONIC)]:
    print(format_rules(builtin_ruleset(*pair)))

ueml = builtin_ruleset(HOLONIC, UEML)
print("Process maps to", map_concept(ueml, "Process"))
try:
    map_concept(ueml, "Proces")
except UnmappedConcept as exc:
    print("typo:", exc)

fwd, bwd = builtin_ruleset(HOLONIC, IEC62264), builtin_ruleset(IEC62264, HOLONIC)
a, b = fwd.sources(), bwd.sources()
print("\n" + check_interoperability(fwd, bwd, a, b).summary())

print("\nsingle-rule deletions:")
for concept in fwd.sources():
    r = check_interoperability(fwd.without(concept), bwd, a, b)
    print(f"  forward without {concept:24s} interoperable={r.interoperable}")
for concept in bwd.sources():
    r = check_interoperability(fwd, bwd.without(concept), a, b)
    print(f"  backward without {concept:30s} interoperable={r.interoperable}")
