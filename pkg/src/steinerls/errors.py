"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SteinerForestError(Exception):
    """Base class for all errors raised by this package."""


class DisconnectedPair(SteinerForestError):
    """A terminal pair has endpoints in different components of the input graph."""


class NoProvenance(SteinerForestError):
    """The instance was built directly from a metric and has no source graph."""


class InfeasibleInput(SteinerForestError):
    """An operation that needs a feasible forest received an infeasible one."""


class EndpointsDisconnected(SteinerForestError):
    """The endpoints of an edge lie in different components of the forest."""


class Infeasible(SteinerForestError):
    """No tree reaches the requested node-weight threshold."""


class CapExceeded(SteinerForestError):
    """The exact k-MST solver was asked to handle more nodes than its cap."""


class DegenerateInstance(SteinerForestError):
    """Every terminal pair has distance zero, so rounding is undefined."""


class IterationCapExceeded(SteinerForestError):
    """The search hit a user supplied iteration cap before converging."""


class BudgetExceeded(SteinerForestError):
    """An exact oracle was asked to solve an instance above its budget."""


class NotATree(SteinerForestError):
    """A single spanning tree was expected."""


class NotMinimallyGuarded(SteinerForestError):
    """The charging algorithm only accepts minimally guarded circuits."""


class ValidationError(SteinerForestError):
    """Input is syntactically fine but semantically invalid."""


class BadParams(ValidationError):
    """Generator parameters are out of range."""


class ParseError(SteinerForestError):
    """Malformed instance text.

    Attributes:
        line: 1-based line number of the offending line.
        message: human readable reason.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class InvariantViolation(SteinerForestError, AssertionError):
    """A structural property that the analysis expects to hold does not."""
