"""Emitted target documents and their bundled subset schemas."""

from __future__ import annotations

from dataclasses import dataclass

from lxml import etree

from ..xmlutil import schema_errors, to_bytes

UEML_NS = "urn:hpm:ueml-subset:1"
B2MML_NS = "http://www.wbf.org/xml/b2mml-v02"

DIALECTS = ("ueml", "b2mml-material", "b2mml-proddef")


@dataclass(frozen=True, eq=False)
class TargetDocument:
    """An XML tree in one target dialect (``ueml``, ``b2mml-material``, ``b2mml-proddef``)."""

    dialect: str
    root: etree._Element

    def to_bytes(self) -> bytes:
        return to_bytes(self.root)

    def schema_errors(self) -> list[str]:
        return schema_errors(self.root, self.dialect)

    @property
    def is_valid(self) -> bool:
        return not self.schema_errors()

    def __eq__(self, other) -> bool:
        if not isinstance(other, TargetDocument):
            return NotImplemented
        return self.dialect == other.dialect and self.to_bytes() == other.to_bytes()

    def __hash__(self) -> int:
        return hash((self.dialect, self.to_bytes()))


# dialect-specific aliases
UemlDocument = TargetDocument
B2mmlDocument = TargetDocument
