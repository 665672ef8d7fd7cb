"""``hpm`` command line: validate, export, import, genealogy, replay, check-interop.

Exit codes are uniform: 0 success, 1 domain failure (invalid model, unknown
holon, rejected events, not interoperable), 2 environment or parse failure
(unreadable file, malformed rules / event log / tolerance file).

Settings resolve as flag, then environment (``HPM_TOLERANCES``,
``HPM_POLICY``), then default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .errors import EventLogSyntax, HolonicError, InvalidModel, RulesSyntax, UnknownHolon
from .hpmxml import check_document, emit_hpm, parse_hpm
from .model import GenealogyGraph, genealogy, topological_order
from .sync import ReconciliationPolicy, detect_divergence, parse_event_log, replay
from .transform import (
    DIALECTS, builtin_ruleset, check_interoperability, export, from_b2mml_material,
    load_rules, required_concepts,
)
from .transform.rules import MappingRuleSet
from .validation import validate_model

EXIT_OK, EXIT_FAIL, EXIT_ENV = 0, 1, 2


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message


def _err(msg: str) -> None:
    print(f"hpm: {msg}", file=sys.stderr)


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temp file in the same directory + rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Exit(EXIT_ENV, f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path, data: bytes) -> None:
    try:
        atomic_write(path, data)
    except OSError as exc:
        raise _Exit(EXIT_ENV, f"cannot write {path}: {exc.strerror or exc}") from None


def _load_model(path):
    data = _read(path)
    try:
        return parse_hpm(data)
    except HolonicError as exc:
        raise _Exit(EXIT_FAIL, f"{path}: {type(exc).__name__}: {exc}") from None


def _require_valid(model, path):
    report = validate_model(model)
    if not report.ok:
        print(report.summary())
        raise _Exit(EXIT_FAIL, f"{path}: invalid model")


# -- commands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    report = check_document(_read(args.model))
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_export(args) -> int:
    model = _load_model(args.model)
    try:
        doc = export(model, args.format, properties_only=args.properties_only)
    except InvalidModel as exc:
        print(exc.report.summary())
        raise _Exit(EXIT_FAIL, f"{args.model}: invalid model, nothing written") from None
    except HolonicError as exc:
        raise _Exit(EXIT_FAIL, f"{type(exc).__name__}: {exc}") from None
    errors = doc.schema_errors()
    if errors:
        raise _Exit(EXIT_FAIL, f"emitted {args.format} document is not schema-valid: {errors[0]}")
    _write(args.out, doc.to_bytes())
    print(f"wrote {args.format} document to {args.out}")
    return EXIT_OK


def cmd_import_b2mml(args) -> int:
    data = _read(args.doc)
    try:
        model = from_b2mml_material(data)
        out = emit_hpm(model)
    except InvalidModel as exc:
        print(exc.report.summary())
        raise _Exit(EXIT_FAIL, f"{args.doc}: recovered model is invalid") from None
    except HolonicError as exc:
        raise _Exit(EXIT_FAIL, f"{args.doc}: {type(exc).__name__}: {exc}") from None
    _write(args.out, out)
    print(f"recovered {_count(len(model.holons), 'holon')}, {_count(len(model.flows), 'flow')}, "
          f"{_count(len(model.process_instances), 'genealogy segment')} -> {args.out}")
    return EXIT_OK


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}{'' if n == 1 else 's'}"


def format_genealogy(graph: GenealogyGraph, holon_id: str) -> str:
    incoming: dict[str, list] = {}
    for e in sorted(graph.edges):
        incoming.setdefault(e.child, []).append(e)
    lines = [f"genealogy of {holon_id}: {_count(len(graph.nodes), 'node')}, "
             f"{_count(len(graph.edges), 'edge')}"]
    for node in topological_order(graph):
        lines.append(node)
        for e in sorted(incoming.get(node, ()), key=lambda e: (e.parent, e.via)):
            lines.append(f"  <- {e.parent} [via={e.via}]")
    return "\n".join(lines)


def format_graph_description(graph: GenealogyGraph) -> str:
    return "".join(f"{e.parent} -> {e.child} [via={e.via}]\n"
                   for e in sorted(graph.edges, key=lambda e: (e.parent, e.child, e.via)))


def cmd_genealogy(args) -> int:
    model = _load_model(args.model)
    _require_valid(model, args.model)
    try:
        graph = genealogy(model, args.holon)
    except UnknownHolon:
        raise _Exit(EXIT_FAIL, f"unknown holon {args.holon!r}") from None
    print(format_genealogy(graph, args.holon))
    if args.out:
        _write(args.out, format_graph_description(graph).encode("utf-8"))
    return EXIT_OK


def _tolerances(args) -> dict[str, float]:
    path = args.tolerances or os.environ.get("HPM_TOLERANCES")
    if not path:
        return {}
    try:
        data = json.loads(_read(path).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise _Exit(EXIT_ENV, f"{path}: malformed tolerance file: {exc}") from None
    if not isinstance(data, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0
            for v in data.values()):
        raise _Exit(EXIT_ENV, f"{path}: tolerance file must map names to non-negative numbers")
    return {str(k): float(v) for k, v in data.items()}


def _policy(args) -> ReconciliationPolicy:
    raw = args.policy or os.environ.get("HPM_POLICY") or ReconciliationPolicy.PHYSICAL_WINS.value
    try:
        return ReconciliationPolicy(raw)
    except ValueError:
        choices = ", ".join(p.value for p in ReconciliationPolicy)
        raise _Exit(EXIT_ENV, f"unknown policy {raw!r}; expected one of {choices}") from None


def cmd_replay(args) -> int:
    policy = _policy(args)
    tolerances = _tolerances(args)
    model = _load_model(args.model)
    _require_valid(model, args.model)
    try:
        events = parse_event_log(_read(args.log).decode("utf-8"))
    except (EventLogSyntax, UnicodeDecodeError) as exc:
        raise _Exit(EXIT_ENV, f"{args.log}: {exc}") from None

    summary = replay(model, events, policy, tolerances)
    print(summary)
    for hid in sorted(summary.observed):
        print(f"  {hid}: {detect_divergence(model, hid, tolerances).verdict.value}")
    _write(args.out or args.model, emit_hpm(model))
    return EXIT_FAIL if summary.rejected else EXIT_OK


def _rules(spec: str) -> MappingRuleSet:
    """A rules file path, or ``builtin:SOURCE:TARGET``."""
    if spec.startswith("builtin:"):
        try:
            _, src, dst = spec.split(":")
            return builtin_ruleset(src, dst)
        except (ValueError, HolonicError) as exc:
            raise _Exit(EXIT_ENV, f"bad builtin rule set {spec!r}: {exc}") from None
    try:
        return load_rules(spec)
    except OSError as exc:
        raise _Exit(EXIT_ENV, f"cannot read {spec}: {exc.strerror or exc}") from None
    except (RulesSyntax, UnicodeDecodeError) as exc:
        raise _Exit(EXIT_ENV, f"{spec}: {exc}") from None


def cmd_check_interop(args) -> int:
    forward = _rules(args.rules_fwd)
    if args.rules_bwd:
        backward = _rules(args.rules_bwd)
    else:
        backward = MappingRuleSet(forward.target, forward.source, ())
    try:
        concepts_a = required_concepts(forward.source, forward.target, backward)
        concepts_b = required_concepts(forward.target, forward.source, forward)
        report = check_interoperability(forward, backward, concepts_a, concepts_b)
    except HolonicError as exc:
        raise _Exit(EXIT_FAIL, f"{type(exc).__name__}: {exc}") from None
    print(report.summary())
    return EXIT_OK if report.interoperable else EXIT_FAIL


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hpm", description="Holonic product model toolchain.")
    cmds = p.add_subparsers(dest="command", required=True)

    c = cmds.add_parser("validate", help="check an HPM-XML model")
    c.add_argument("model")
    c.set_defaults(func=cmd_validate)

    c = cmds.add_parser("export", help="transform a model to UEML or B2MML")
    c.add_argument("model")
    c.add_argument("--format", required=True, choices=DIALECTS)
    c.add_argument("--out", required=True)
    c.add_argument("--properties-only", action="store_true",
                   help="b2mml-material: export holon properties only, not state attributes")
    c.set_defaults(func=cmd_export)

    c = cmds.add_parser("import-b2mml", help="recover a partial model from a B2MML material document")
    c.add_argument("doc")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_import_b2mml)

    c = cmds.add_parser("genealogy", help="print the ancestor graph of a holon")
    c.add_argument("model")
    c.add_argument("holon")
    c.add_argument("--out", help="also write 'parent -> child [via=instance]' lines here")
    c.set_defaults(func=cmd_genealogy)

    c = cmds.add_parser("replay", help="ingest an event log and reconcile divergences")
    c.add_argument("model")
    c.add_argument("log")
    c.add_argument("--policy", choices=[x.value for x in ReconciliationPolicy])
    c.add_argument("--tolerances", help="JSON object of attribute name -> absolute tolerance")
    c.add_argument("--out", help="where to write the updated model (default: in place)")
    c.set_defaults(func=cmd_replay)

    c = cmds.add_parser("check-interop", help="check a pair of mappings for interoperability")
    c.add_argument("--rules-fwd", required=True, help="rules file or builtin:SOURCE:TARGET")
    c.add_argument("--rules-bwd", help="rules file or builtin:SOURCE:TARGET")
    c.set_defaults(func=cmd_check_interop)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            _err(exc.message)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
