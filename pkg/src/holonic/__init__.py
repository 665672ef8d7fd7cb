"""Holonic product models: core meta-model, HPM-XML I/O, UEML / B2MML
transforms and physical/informational synchronisation."""

from .errors import *  # noqa: F401,F403
from .hpmxml import HPM_NS, check_document, emit_hpm, parse_hpm, read_hpm, write_hpm
from .model import (
    CONSUMED_MARKER, Flow, FlowKind, GenealogyEdge, GenealogyGraph, Holon, HolonKind,
    InformationalPart, Model, Observation, OutputSpec, PhysicalPartRef, Process,
    ProcessInstance, Resource, ResourceKind, State, genealogy, genealogy_edges,
    lifecycle, topological_order,
)
from .sync import (
    DivergenceReport, InformationalUpdate, PhysicalEvent, ReconciliationPolicy,
    ReplaySummary, Resolution, Verdict, detect_divergence, ingest_informational_update,
    ingest_physical_event, parse_event_log, read_event_log, reconcile, replay,
)
from .transform import (
    HOLONIC, IEC62264, UEML, MappingRule, MappingRuleSet, builtin_ruleset,
    check_interoperability, export, from_b2mml_material, map_concept,
    to_b2mml_material, to_b2mml_product_definition, to_ueml,
)
from .validation import Severity, ValidationReport, Violation, validate_model
from .values import Flag, Quantity, Text

__version__ = "0.1.0"
