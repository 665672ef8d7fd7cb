import json
import shutil
import subprocess
import sys

import pytest
from lxml import etree

from holonic import Verdict, detect_divergence, genealogy, parse_hpm
from holonic.cli import atomic_write, main
from holonic.transform import B2MML_NS, UEML_NS

from oracles import all_genealogy_edges


@pytest.fixture
def model(tmp_path, fixtures):
    p = tmp_path / "m.hpm.xml"
    shutil.copy(fixtures / "three_holons.hpm.xml", p)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


# -- validate ----------------------------------------------------------------

def test_validate_ok(capsys, model):
    code, out, _ = run(capsys, "validate", model)
    assert code == 0
    assert "0 errors" in out


def test_validate_mixed_inputs(capsys, fixtures):
    code, out, _ = run(capsys, "validate", fixtures / "mixed_inputs.hpm.xml")
    assert code == 1
    assert "MixedInputKinds" in out


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "nope.xml")
    assert code == 2 and "cannot read" in err


def test_validate_garbage(capsys, tmp_path):
    p = tmp_path / "g.xml"
    p.write_bytes(b"<hpm:model")
    code, out, _ = run(capsys, "validate", p)
    assert code == 1 and "XmlSyntax" in out


# -- export --------------------------------------------------------------------

def test_export_b2mml_material(capsys, model, tmp_path):
    dest = tmp_path / "mat.xml"
    assert run(capsys, "export", model, "--format", "b2mml-material", "--out", dest)[0] == 0
    root = etree.parse(str(dest)).getroot()
    ns = {"b": B2MML_NS}
    assert root.xpath("b:MaterialLot/b:MaterialSublot/b:ID/text()", namespaces=ns) == ["H1", "H2", "H3"]


def test_export_ueml(capsys, model, tmp_path):
    dest = tmp_path / "u.xml"
    assert run(capsys, "export", model, "--format", "ueml", "--out", dest)[0] == 0
    root = etree.parse(str(dest)).getroot()
    ns = {"u": UEML_NS}
    assert len(root.xpath("u:Object", namespaces=ns)) == 3
    assert root.xpath("u:Activity/@name", namespaces=ns) == ["drill"]


def test_export_proddef(capsys, model, tmp_path):
    dest = tmp_path / "p.xml"
    assert run(capsys, "export", model, "--format", "b2mml-proddef", "--out", dest)[0] == 0
    assert b"PT30M" in dest.read_bytes()


@pytest.mark.parametrize("fmt", ["ueml", "b2mml-material", "b2mml-proddef"])
def test_export_invalid_writes_nothing(capsys, fixtures, tmp_path, fmt):
    dest = tmp_path / "out.xml"
    code, _, err = run(capsys, "export", fixtures / "mixed_inputs.hpm.xml", "--format", fmt, "--out", dest)
    assert code == 1
    assert not dest.exists()
    assert list(tmp_path.iterdir()) == []


def test_export_unwritable_target(capsys, model, tmp_path):
    code, _, _ = run(capsys, "export", model, "--format", "ueml", "--out", tmp_path / "no" / "dir.xml")
    assert code == 2


def test_export_bad_format(model):
    with pytest.raises(SystemExit) as exc:
        main(["export", str(model), "--format", "pdf", "--out", "x"])
    assert exc.value.code == 2


# -- import ----------------------------------------------------------------------

def test_export_then_import(capsys, model, tmp_path):
    mat, back = tmp_path / "mat.xml", tmp_path / "back.hpm.xml"
    run(capsys, "export", model, "--format", "b2mml-material", "--out", mat)
    assert run(capsys, "import-b2mml", mat, "--out", back)[0] == 0
    original, recovered = parse_hpm(model.read_bytes()), parse_hpm(back.read_bytes())
    assert all_genealogy_edges(recovered) == all_genealogy_edges(original)
    assert genealogy(recovered, "H3").nodes == genealogy(original, "H3").nodes


def test_import_malformed(capsys, tmp_path):
    p = tmp_path / "bad.xml"
    p.write_bytes(b"<oops>")
    code, _, _ = run(capsys, "import-b2mml", p, "--out", tmp_path / "o.xml")
    assert code == 1 and not (tmp_path / "o.xml").exists()


def test_import_empty_document(capsys, tmp_path):
    p = tmp_path / "empty.xml"
    p.write_text(f'<b:MaterialInformation xmlns:b="{B2MML_NS}"/>')
    assert run(capsys, "import-b2mml", p, "--out", tmp_path / "o.xml")[0] == 0
    m = parse_hpm((tmp_path / "o.xml").read_bytes())
    assert not m.holons


# -- genealogy ---------------------------------------------------------------------

def test_genealogy_composite(capsys, model, tmp_path):
    graph = tmp_path / "g.txt"
    code, out, _ = run(capsys, "genealogy", model, "H3", "--out", graph)
    assert code == 0
    assert "3 nodes, 2 edges" in out
    assert out.splitlines()[1:4] == ["H1", "H2", "H3"]
    assert graph.read_text() == "H1 -> H3 [via=PI1]\nH2 -> H3 [via=PI1]\n"


def test_genealogy_elementary(capsys, model):
    code, out, _ = run(capsys, "genealogy", model, "H1")
    assert code == 0
    assert "1 node, 0 edges" in out
    assert out.splitlines()[1:] == ["H1"]


def test_genealogy_unknown(capsys, model):
    code, _, err = run(capsys, "genealogy", model, "H42")
    assert code == 1 and "H42" in err


def test_genealogy_output_is_deterministic(capsys, model):
    assert run(capsys, "genealogy", model, "H3") == run(capsys, "genealogy", model, "H3")


# -- replay ------------------------------------------------------------------------

def test_replay_coherent(capsys, model, fixtures):
    code, out, _ = run(capsys, "replay", model, fixtures / "coherent.jsonl")
    assert code == 0
    assert "0 divergences" in out


def test_replay_one_discrepancy(capsys, model, fixtures, tmp_path):
    dest = tmp_path / "after.hpm.xml"
    code, out, _ = run(capsys, "replay", model, fixtures / "one_discrepancy.jsonl",
                       "--tolerances", fixtures / "tolerances.json", "--policy", "PhysicalWins",
                       "--out", dest)
    assert code == 0
    assert "1 divergence, 1 reconciled" in out
    m = parse_hpm(dest.read_bytes())
    assert detect_divergence(m, "H1", {"length": 0.01}).verdict is Verdict.COHERENT
    # --out leaves the input untouched
    assert parse_hpm(model.read_bytes()).observations == {}


def test_replay_in_place(capsys, model, fixtures):
    run(capsys, "replay", model, fixtures / "one_discrepancy.jsonl", "--tolerances",
        fixtures / "tolerances.json")
    assert len(parse_hpm(model.read_bytes()).observations["H1"]) == 1


def test_replay_out_of_order(capsys, model, fixtures):
    code, out, _ = run(capsys, "replay", model, fixtures / "out_of_order.jsonl")
    assert code == 1
    assert "1 rejected" in out and "event 2" in out


def test_replay_env_settings(capsys, model, fixtures, tmp_path, monkeypatch):
    loose = tmp_path / "loose.json"
    loose.write_text(json.dumps({"length": 1.0}))
    monkeypatch.setenv("HPM_TOLERANCES", str(loose))
    monkeypatch.setenv("HPM_POLICY", "Manual")
    _, out, _ = run(capsys, "replay", model, fixtures / "one_discrepancy.jsonl", "--out", tmp_path / "a.xml")
    assert "0 divergences" in out
    # the flag beats the environment
    _, out, _ = run(capsys, "replay", model, fixtures / "one_discrepancy.jsonl",
                    "--tolerances", fixtures / "tolerances.json", "--out", tmp_path / "b.xml")
    assert "1 divergence, 0 reconciled, 1 pending" in out


def test_replay_bad_env_policy(capsys, model, fixtures, monkeypatch):
    monkeypatch.setenv("HPM_POLICY", "Coinflip")
    assert run(capsys, "replay", model, fixtures / "coherent.jsonl")[0] == 2


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"x": -1}', '{"x": "wide"}'])
def test_replay_bad_tolerance_file(capsys, model, fixtures, tmp_path, content):
    p = tmp_path / "tol.json"
    p.write_text(content)
    assert run(capsys, "replay", model, fixtures / "coherent.jsonl", "--tolerances", p)[0] == 2


def test_replay_bad_log(capsys, model, tmp_path):
    p = tmp_path / "log.jsonl"
    p.write_text("{broken\n")
    before = model.read_bytes()
    assert run(capsys, "replay", model, p)[0] == 2
    assert model.read_bytes() == before


# -- check-interop -----------------------------------------------------------------

def test_interop_builtin_pair(capsys):
    code, out, _ = run(capsys, "check-interop", "--rules-fwd", "builtin:HOLONIC:IEC62264",
                       "--rules-bwd", "builtin:IEC62264:HOLONIC")
    assert code == 0 and "interoperable" in out


def test_interop_forward_only(capsys):
    code, out, _ = run(capsys, "check-interop", "--rules-fwd", "builtin:HOLONIC:IEC62264")
    assert code == 1
    for c in ["MaterialSublot", "MaterialLot", "MaterialDefinition", "MaterialLotPropertyDefinition"]:
        assert c in out


def test_interop_from_files(capsys, tmp_path):
    from importlib.resources import files
    rules = files("holonic") / "rules"
    fwd, bwd = tmp_path / "f.rules", tmp_path / "b.rules"
    fwd.write_text((rules / "holonic_to_iec62264.rules").read_text("utf-8"))
    bwd.write_text((rules / "iec62264_to_holonic.rules").read_text("utf-8").replace(
        "MaterialLot -> HolonFlow [MaterialModel]\n", ""))
    assert run(capsys, "check-interop", "--rules-fwd", fwd, "--rules-bwd", bwd)[0] == 1
    bwd.write_text((rules / "iec62264_to_holonic.rules").read_text("utf-8"))
    assert run(capsys, "check-interop", "--rules-fwd", fwd, "--rules-bwd", bwd)[0] == 0


def test_interop_syntax_error(capsys, tmp_path):
    p = tmp_path / "bad.rules"
    p.write_text("@source HOLONIC\n@target IEC62264\nHolon = MaterialSublot\n")
    code, _, err = run(capsys, "check-interop", "--rules-fwd", p)
    assert code == 2 and "line 3" in err


def test_interop_missing_file(capsys, tmp_path):
    assert run(capsys, "check-interop", "--rules-fwd", tmp_path / "none.rules")[0] == 2


# -- plumbing ----------------------------------------------------------------------

def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "f.txt"
    p.write_text("old")
    atomic_write(p, b"new")
    assert p.read_bytes() == b"new"
    assert [x.name for x in tmp_path.iterdir()] == ["f.txt"]


def test_module_entry_point(model):
    r = subprocess.run([sys.executable, "-m", "holonic", "validate", str(model)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "0 errors" in r.stdout
