import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from lxml import etree

from holonic import (
    HPM_NS, InformationalPart, Model, PhysicalPartRef, Quantity, Text, check_document,
    emit_hpm, parse_hpm,
)
from holonic.errors import DanglingRef, SchemaViolation, UnknownNamespace, XmlSyntax
from holonic.generators import random_model
from holonic.xmlutil import schema_errors

from conftest import T0, elementary

SECTIONS = ["holons", "states", "processes", "processInstances", "resources", "flows"]


def test_empty_model_document():
    data = emit_hpm(Model())
    root = etree.fromstring(data)
    assert root.tag == f"{{{HPM_NS}}}model"
    assert [etree.QName(c).localname for c in root] == SECTIONS
    assert all(len(c) == 0 for c in root)
    assert parse_hpm(data) == Model()


def test_emit_is_deterministic(assembly):
    assert emit_hpm(assembly) == emit_hpm(assembly)
    assert emit_hpm(parse_hpm(emit_hpm(assembly))) == emit_hpm(assembly)


def test_round_trip_identity(assembly):
    assert parse_hpm(emit_hpm(assembly)) == assembly


def test_non_ascii_round_trip():
    m = Model()
    m.new_elementary_holon("H1", InformationalPart("I1", "Ø-ring", {"note": "café"}),
                           PhysicalPartRef("P1", "SN-Ø1"), None, T0)
    data = emit_hpm(m)
    assert "Ø-ring".encode("utf-8") in data
    data.decode("utf-8")
    back = parse_hpm(data)
    assert back.holon("H1").informational_part.description == "Ø-ring"
    assert back == m


def test_insertion_order_does_not_change_output():
    a, b = Model(), Model()
    elementary(a, "H1", 1)
    elementary(a, "H2", 2)
    elementary(b, "H2", 2)
    elementary(b, "H1", 1)
    assert emit_hpm(a) == emit_hpm(b)


def test_value_types_survive():
    m = Model()
    elementary(m, "H1", 1, attrs={"shape": {"mass": (1.5, "kg"), "painted": True, "colour": "red",
                                            "tiny": 1e-300, "big": 12345678901234567890.0}})
    s = parse_hpm(emit_hpm(m)).latest_state("H1")
    assert s.shape["mass"] == Quantity(1.5, "kg")
    assert s.shape["colour"] == Text("red")
    assert s.shape == m.latest_state("H1").shape


def test_fixture_file(fixtures):
    m = parse_hpm((fixtures / "three_holons.hpm.xml").read_bytes())
    assert len(m.holons) == 3
    assert len(m.process_instances) == 1
    assert len(check_document((fixtures / "three_holons.hpm.xml").read_bytes())) == 0


def test_fixture_matches_schema(fixtures):
    root = etree.fromstring((fixtures / "three_holons.hpm.xml").read_bytes())
    assert schema_errors(root, "hpm") == []


def test_dangling_state_reference(fixtures):
    data = (fixtures / "three_holons.hpm.xml").read_bytes().replace(
        b'<hpm:input state="H2.s0"/>', b'<hpm:input state="S9"/>')
    with pytest.raises(DanglingRef) as exc:
        parse_hpm(data)
    assert exc.value.ref == "S9"
    assert check_document(data).rules() == {"DanglingRef"}


def test_truncated_file(fixtures):
    data = (fixtures / "three_holons.hpm.xml").read_bytes()
    with pytest.raises(XmlSyntax):
        parse_hpm(data[: len(data) // 2])
    r = check_document(data[: len(data) // 2])
    assert len(r.errors) == 1 and r.errors[0].rule == "XmlSyntax"


def test_mixed_inputs_fixture(fixtures):
    r = check_document((fixtures / "mixed_inputs.hpm.xml").read_bytes())
    assert not r.ok
    assert "MixedInputKinds" in {v.rule for v in r.errors}


def test_wrong_namespace():
    data = b'<?xml version="1.0" encoding="UTF-8"?><model xmlns="urn:other"/>'
    with pytest.raises(UnknownNamespace):
        parse_hpm(data)
    assert check_document(data).rules() == {"UnknownNamespace"}


def test_schema_violation(fixtures):
    data = (fixtures / "three_holons.hpm.xml").read_bytes().replace(
        b'kind="Composite">', b'kind="Gaseous">', 1)
    with pytest.raises(SchemaViolation):
        parse_hpm(data)
    assert check_document(data).rules() == {"SchemaViolation"}


def test_non_utf8_rejected():
    data = '<?xml version="1.0" encoding="ISO-8859-1"?><model xmlns="urn:hpm:model:1"/>'.encode("latin-1")
    with pytest.raises(XmlSyntax):
        parse_hpm(data)


def test_entities_not_expanded():
    data = (b'<?xml version="1.0" encoding="UTF-8"?><!DOCTYPE m [<!ENTITY e SYSTEM "file:///etc/passwd">]>'
            b'<hpm:model xmlns:hpm="urn:hpm:model:1">&e;</hpm:model>')
    r = check_document(data)
    assert not r.ok


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_random_models(seed):
    m = random_model(seed)
    data = emit_hpm(m)
    back = parse_hpm(data)
    assert back == m
    assert emit_hpm(back) == data


@given(st.binary(max_size=200))
def test_check_document_is_total(data):
    r = check_document(data)
    assert r.ok or r.errors
