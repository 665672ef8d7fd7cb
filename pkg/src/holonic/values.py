"""Typed attribute values and UTC timestamps.

Every attribute or property value is one of three kinds:

* :class:`Quantity` -- a finite number with a unit string (possibly empty),
* :class:`Text` -- free text,
* :class:`Flag` -- a boolean.

:func:`as_value` coerces plain Python values into these, so callers can write
``{"x": (2, "m"), "label": "bolt", "ok": True}``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Mapping, Union

from .errors import MalformedAttribute, MalformedId

__all__ = [
    "Quantity", "Text", "Flag", "TypedValue", "as_value", "as_group",
    "format_number", "format_duration", "utc", "format_timestamp", "parse_timestamp",
    "check_id", "is_ncname",
]


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class Flag:
    flag: bool


TypedValue = Union[Quantity, Text, Flag]

# XML 1.0 Char production, minus the surrogate block
_XML_ILLEGAL = re.compile("[^\t\n\r\u0020-\ud7ff\ue000-\ufffd\U00010000-\U0010ffff]")
_NCNAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def is_ncname(s: str) -> bool:
    return isinstance(s, str) and bool(_NCNAME.match(s))


def check_id(s, what: str = "id") -> str:
    """Return ``s`` if it is a usable identifier (an ASCII NCName token)."""
    if not is_ncname(s):
        raise MalformedId(f"{what} {s!r} is not an xml:id-compatible token")
    return s


def _check_text(s: str, what: str) -> str:
    if _XML_ILLEGAL.search(s):
        raise MalformedAttribute(f"{what} contains characters not representable in XML")
    return s


def as_value(v, *, name: str = "value", require_unit: bool = False) -> TypedValue:
    """Coerce ``v`` into a :data:`TypedValue`.

    Accepts an existing typed value, a ``bool``, a ``str``, a bare number
    (unit ``""``), or a ``(number, unit)`` pair.
    """
    if isinstance(v, (Text, Flag)):
        out = v
    elif isinstance(v, Quantity):
        out = v
    elif isinstance(v, bool):
        out = Flag(v)
    elif isinstance(v, str):
        out = Text(v)
    elif isinstance(v, (int, float)):
        out = Quantity(v, "")
    elif isinstance(v, tuple) and len(v) == 2 and isinstance(v[1], str) \
            and isinstance(v[0], (int, float)) and not isinstance(v[0], bool):
        out = Quantity(v[0], v[1])
    else:
        raise MalformedAttribute(f"{name}: unsupported value {v!r}")

    if isinstance(out, Quantity):
        if not math.isfinite(out.value):
            raise MalformedAttribute(f"{name}: non-finite number {out.value!r}")
        if require_unit and not out.unit:
            raise MalformedAttribute(f"{name}: numeric value requires a unit")
        _check_text(out.unit, f"{name} unit")
    elif isinstance(out, Text):
        _check_text(out.text, name)
    return out


def as_group(attrs: Mapping | None, *, require_unit: bool = False) -> dict[str, TypedValue]:
    """Coerce a name -> value mapping into an attribute group."""
    group: dict[str, TypedValue] = {}
    for k, v in (attrs or {}).items():
        if not isinstance(k, str) or not k.strip():
            raise MalformedAttribute(f"attribute name must be a non-empty string, got {k!r}")
        _check_text(k, "attribute name")
        group[k] = as_value(v, name=k, require_unit=require_unit)
    return group


def format_number(x: float) -> str:
    """Shortest decimal string that parses back to ``x``."""
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


# -- timestamps -------------------------------------------------------------

def utc(ts) -> datetime:
    """Normalise ``ts`` to an aware UTC datetime truncated to milliseconds.

    Naive datetimes are taken to be UTC already; strings are parsed as
    ISO-8601.
    """
    if isinstance(ts, str):
        return parse_timestamp(ts)
    if not isinstance(ts, datetime):
        raise TypeError(f"expected datetime or ISO-8601 string, got {type(ts).__name__}")
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    else:
        ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=ts.microsecond // 1000 * 1000)


def format_timestamp(ts: datetime) -> str:
    ts = utc(ts)
    return ts.strftime("%Y-%m-%dT%H:%M:%S") + f".{ts.microsecond // 1000:03d}Z"


def parse_timestamp(s: str) -> datetime:
    s = s.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(s)
    except ValueError:
        raise ValueError(f"malformed timestamp {s!r}") from None
    return utc(ts)


def format_duration(delta: timedelta) -> str:
    """ISO-8601 duration in hours/minutes/seconds, e.g. ``PT1H30M`` or ``PT0S``."""
    ms = round(delta.total_seconds() * 1000)
    sign = "-" if ms < 0 else ""
    ms = abs(ms)
    hours, ms = divmod(ms, 3_600_000)
    minutes, ms = divmod(ms, 60_000)
    seconds, ms = divmod(ms, 1000)
    out = ""
    if hours:
        out += f"{hours}H"
    if minutes:
        out += f"{minutes}M"
    if seconds or ms or not out:
        out += f"{seconds}.{ms:03d}".rstrip("0").rstrip(".") + "S"
    return f"{sign}PT{out}"
