"""Exception classes shared across the pipeline."""

from __future__ import annotations


class QosError(Exception):
    """Base class for every error raised by sdnqos."""


class ParseError(QosError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class UnknownPrefix(ParseError):
    def __init__(self, prefix: str, line: int, column: int = 0):
        super().__init__(line, column, f"unknown prefix {prefix!r}")
        self.prefix = prefix


class NonNumericLiteral(QosError, ValueError):
    pass


class VariableInData(QosError, ValueError):
    pass


class RuleError(QosError):
    """A rule cannot be compiled (unsafe variables, unschedulable builtins...)."""


class BuiltinTypeError(QosError, TypeError):
    def __init__(self, predicate, term, message: str = ""):
        super().__init__(f"{predicate}: bad argument {term}" + (f" ({message})" if message else ""))
        self.predicate = predicate
        self.term = term


class DivisionByZero(QosError, ZeroDivisionError):
    pass


class UnresolvedReference(QosError, LookupError):
    """``ref`` is the first missing property or parameter, ``missing`` all of them."""

    def __init__(self, ref, constraint=None, missing=()):
        self.missing = tuple(missing) or (ref,)
        where = f" for {constraint}" if constraint is not None else ""
        names = ", ".join(str(m) for m in self.missing)
        super().__init__(f"unresolved reference {names}{where}")
        self.ref = ref
        self.constraint = constraint


class UnknownPack(QosError, KeyError):
    pass


class UnknownDevice(QosError, LookupError):
    pass


class InstantiationError(QosError):
    pass


class UnknownRecipe(InstantiationError):
    pass


class UnboundIngredient(InstantiationError):
    pass


class UnknownOffering(InstantiationError):
    pass


class AlreadyInstantiated(InstantiationError):
    pass


class NorthboundError(QosError):
    pass


class IncompleteConfig(NorthboundError):
    def __init__(self, subject, field: str):
        super().__init__(f"{subject}: missing or invalid {field}")
        self.subject = subject
        self.field = field


class AmbiguousTenant(NorthboundError):
    pass


class SinkError(QosError, OSError):
    pass
