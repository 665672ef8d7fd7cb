"""Serialise a model to HPM-XML, then to UEML and B2MML, then back.

The HPM-XML document is the lossless native format.  The UEML and B2MML
documents are projections: the B2MML material document keeps holons, lots,
properties and genealogy, so importing it recovers those but not processes.

Run:  python demos/02_export_and_import.py [output-dir]
"""

import sys
import tempfile
from pathlib import Path

from holonic import emit_hpm, export, from_b2mml_material, genealogy, parse_hpm
from holonic.generators import random_model

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="hpm-demo-"))
out_dir.mkdir(parents=True, exist_ok=True)

# %% A seeded random model stands in for a real shop-floor record
m = random_model(42, max_holons=12)
print(f"model: {len(m.holons)} holons, {len(m.process_instances)} process instances, "
      f"{len(m.flows)} flows")

native = emit_hpm(m)
(out_dir / "model.hpm.xml").write_bytes(native)
assert parse_hpm(native) == m
print(f"HPM-XML: {len(native)} bytes, parse(emit(m)) == m")

# %% Each dialect validates against its bundled subset schema
for dialect in ("ueml", "b2mml-material", "b2mml-proddef"):
    doc = export(m, dialect)
    path = out_dir / f"model.{dialect}.xml"
    path.write_bytes(doc.to_bytes())
    print(f"{dialect:15s} {len(doc.root):3d} top-level elements, schema errors: {len(doc.schema_errors())}")

# %% Import the material document and compare what survives
back = from_b2mml_material((out_dir / "model.b2mml-material.xml").read_bytes())
print("\nrecovered from B2MML material:")
print("  same holon ids:      ", set(back.holons) == set(m.holons))
print("  same genealogy edges:", all(
    {(e.parent, e.child) for e in genealogy(back, h).edges} ==
    {(e.parent, e.child) for e in genealogy(m, h).edges} for h in m.holons))
print("  processes recovered: ", len(back.processes), "(not carried by the material model)")
print(f"\nfiles written to {out_dir}")
