"""Small lxml helpers shared by the HPM-XML codec and the target emitters."""

from __future__ import annotations

import io
from functools import lru_cache
from importlib import resources

from lxml import etree

from .errors import XmlSyntax

SCHEMA_FILES = {
    "hpm": "hpm-1.xsd",
    "ueml": "ueml-subset.xsd",
    "b2mml-material": "b2mml-material-subset.xsd",
    "b2mml-proddef": "b2mml-proddef-subset.xsd",
}

_PARSER = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=False)


@lru_cache(maxsize=None)
def schema(name: str) -> etree.XMLSchema:
    path = resources.files("holonic") / "schemas" / SCHEMA_FILES[name]
    with resources.as_file(path) as p:
        return etree.XMLSchema(etree.parse(str(p)))


def schema_path(name: str) -> str:
    return str(resources.files("holonic") / "schemas" / SCHEMA_FILES[name])


def schema_errors(root: etree._Element, name: str) -> list[str]:
    """Validate ``root`` against a bundled schema; return error messages."""
    xsd = schema(name)
    if xsd.validate(root.getroottree()):
        return []
    return [f"line {e.line}: {e.message}" for e in xsd.error_log]


def parse_bytes(data: bytes) -> etree._Element:
    if isinstance(data, str):
        raise TypeError("expected bytes, got str")
    try:
        tree = etree.parse(io.BytesIO(data), _PARSER)
    except etree.XMLSyntaxError as exc:
        raise XmlSyntax(str(exc)) from None
    except ValueError as exc:
        raise XmlSyntax(str(exc)) from None
    encoding = tree.docinfo.encoding
    if encoding and encoding.upper() not in ("UTF-8", "UTF8"):
        raise XmlSyntax(f"only UTF-8 documents are accepted, got {encoding}")
    return tree.getroot()


def sub(parent: etree._Element, tag: str, attrs: dict | None = None,
        text: str | None = None) -> etree._Element:
    """Append a child element; attributes are written in alphabetical order."""
    el = etree.SubElement(parent, tag)
    for k in sorted(attrs or {}):
        v = attrs[k]
        if v is not None:
            el.set(k, v)
    if text is not None:
        el.text = text
    return el


def to_bytes(root: etree._Element) -> bytes:
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=True)


def local(el: etree._Element) -> str:
    return etree.QName(el).localname
