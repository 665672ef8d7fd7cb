"""Positive and negative fixtures for each structural constraint."""

from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonic import HolonKind, Model, PhysicalPartRef, ResourceKind, validate_model
from holonic.generators import random_model
from holonic.model import Resource

from conftest import elementary, minutes, out


def rules(m):
    return validate_model(m).rules()


def test_empty_model_has_no_violations():
    r = validate_model(Model())
    assert len(r) == 0 and r.ok
    assert r.summary() == "0 errors, 0 warnings"


def test_assembly_is_valid(assembly):
    assert len(validate_model(assembly)) == 0


# -- elementary part cardinality --------------------------------------------

def test_elementary_without_physical_part(assembly):
    assembly.holons["H1"].physical_part = None
    assert "ElementaryPartCardinality" in rules(assembly)


def test_elementary_without_informational_part(assembly):
    assembly.holons["H2"].informational_part = None
    assert "ElementaryPartCardinality" in rules(assembly)


def test_composite_with_own_physical_part(assembly):
    assembly.holons["H3"].physical_part = PhysicalPartRef("P9", "SN-999")
    assert "ElementaryPartCardinality" in rules(assembly)


# -- composite requires process ---------------------------------------------

def test_orphan_composite(assembly):
    del assembly.process_instances["PI1"]
    r = validate_model(assembly)
    assert [v.rule for v in r.errors if v.entity == "H3"] == ["CompositeHasProcess"]


def test_cyclic_genealogy_detected(assembly):
    m = assembly
    m.apply_process_instance("drill", ["H3.s0"], [out("H4", 4)], minutes(40), minutes(50),
                             instance_id="PI2")
    # make H4 an input of the instance that produced H3: H3 -> H4 -> H3
    pi = m.process_instances["PI1"]
    m.process_instances["PI1"] = replace(pi, input_states=("H4.s0",))
    assert "GenealogyCycle" in rules(m)


# -- composite or elementary inputs, not both --------------------------------

def test_uniform_inputs_pass(assembly):
    assert "MixedInputKinds" not in rules(assembly)


def test_mixed_inputs_flagged(assembly):
    m = assembly
    m.apply_process_instance("drill", ["H3.s0"], [out("H4", 4)], minutes(40), minutes(50),
                             instance_id="PI2")
    pi = m.process_instances["PI2"]
    m.process_instances["PI2"] = replace(pi, input_states=pi.input_states + ("H1.s1",))
    assert "MixedInputKinds" in rules(m)


# -- material or human resources --------------------------------------------

@pytest.mark.parametrize("kind", list(ResourceKind))
def test_known_resource_kinds(kind):
    m = Model()
    m.add_resource("R1", kind)
    assert validate_model(m).ok


def test_unknown_resource_kind():
    m = Model()
    m.resources["R1"] = Resource("R1", "Robot")
    assert "ResourceKind" in rules(m)


def test_personnel_must_be_human(assembly):
    assembly.add_resource("R2", "Material", "steel")
    pi = assembly.process_instances["PI1"]
    assembly.process_instances["PI1"] = replace(pi, personnel=("R2",))
    assert "ResourceKind" in rules(assembly)


# -- bookkeeping rules -------------------------------------------------------

def test_dangling_state_ref(assembly):
    pi = assembly.process_instances["PI1"]
    assembly.process_instances["PI1"] = replace(pi, input_states=("S9",))
    assert "DanglingRef" in rules(assembly)


def test_state_order_violation(assembly):
    h = assembly.holons["H1"]
    h.state_history.reverse()
    assert "StateOrder" in rules(assembly)


def test_state_kind_mismatch(assembly):
    assembly.states["H3.s0"] = replace(assembly.states["H3.s0"], kind=HolonKind.ELEMENTARY)
    assert "StateKind" in rules(assembly)


def test_time_order(assembly):
    pi = assembly.process_instances["PI1"]
    assembly.process_instances["PI1"] = replace(pi, start=pi.end, end=pi.start)
    assert "TimeOrder" in rules(assembly)


def test_output_must_be_composite(assembly):
    pi = assembly.process_instances["PI1"]
    assembly.process_instances["PI1"] = replace(pi, output_holons=("H3", "H2"))
    assert "OutputNotComposite" in rules(assembly)


def test_duplicate_tag_is_only_a_warning():
    m = Model()
    elementary(m, "H1", 1)
    elementary(m, "H2", 2)
    m.holons["H2"].physical_part = PhysicalPartRef("P2", "SN-001")
    r = validate_model(m)
    assert r.ok
    assert [v.rule for v in r.warnings] == ["DuplicateTag"]


def test_report_is_sorted_and_deterministic(assembly):
    assembly.holons["H1"].physical_part = None
    del assembly.process_instances["PI1"]
    a, b = validate_model(assembly), validate_model(assembly)
    assert a == b
    assert a.summary().endswith("errors, 0 warnings")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_models_are_valid(seed):
    r = validate_model(random_model(seed))
    assert r.ok, r.summary()
