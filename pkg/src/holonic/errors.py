"""Exception hierarchy shared by every part of the toolchain."""

from __future__ import annotations


class HolonicError(Exception):
    """Base class for all domain errors raised by :mod:`holonic`."""


# -- model construction -----------------------------------------------------

class DuplicateId(HolonicError):
    pass


class MalformedId(HolonicError):
    pass


class MalformedAttribute(HolonicError):
    pass


class UnknownHolon(HolonicError, LookupError):
    pass


class UnknownStateId(HolonicError, LookupError):
    pass


class UnknownProcess(HolonicError, LookupError):
    pass


class UnknownResource(HolonicError, LookupError):
    pass


class MixedInputKinds(HolonicError):
    """Process-instance inputs mix Elementary and Composite states."""


class TimeOrderViolation(HolonicError):
    pass


class NonMonotonicTimestamp(HolonicError):
    pass


class InvalidModel(HolonicError):
    """Raised when an operation requires a model free of Error violations."""

    def __init__(self, report):
        self.report = report
        errors = report.errors
        head = "; ".join(f"{v.rule}({v.entity})" for v in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        super().__init__(f"model has {len(errors)} error(s): {head}{more}")


# -- documents --------------------------------------------------------------

class XmlSyntax(HolonicError):
    pass


class UnknownNamespace(HolonicError):
    pass


class DanglingRef(HolonicError):
    def __init__(self, ref: str, where: str = ""):
        self.ref = ref
        msg = f"dangling reference {ref!r}"
        super().__init__(f"{msg} in {where}" if where else msg)


class SchemaViolation(HolonicError):
    def __init__(self, message: str, details: list[str] | None = None):
        self.details = list(details or [])
        super().__init__(message)


# -- transformation ---------------------------------------------------------

class UnsupportedPair(HolonicError):
    pass


class UnmappedConcept(HolonicError, LookupError):
    def __init__(self, concept: str, nearest: list[str]):
        self.concept = concept
        self.nearest = nearest
        hint = f"; nearest known: {', '.join(nearest)}" if nearest else ""
        super().__init__(f"no rule maps concept {concept!r}{hint}")


class MismatchedPair(HolonicError):
    pass


class AmbiguousSublot(HolonicError):
    pass


class RulesSyntax(HolonicError):
    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {reason}: {line!r}")


# -- synchronisation --------------------------------------------------------

class UnknownTag(HolonicError, LookupError):
    pass


class AmbiguousTag(HolonicError):
    pass


class NotElementary(HolonicError):
    pass


class NoObservations(HolonicError):
    pass


class NotDivergent(HolonicError):
    pass


class EventLogSyntax(HolonicError):
    pass
