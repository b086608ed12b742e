"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class PlanningError(Exception):
    """Base class of all errors raised by :mod:`cthd`."""


# core model ---------------------------------------------------------------

class ConflictingEffects(PlanningError):
    """An action adds and deletes the same proposition."""


class Inapplicable(PlanningError):
    """Preconditions are not satisfied in the given state."""


class NotIndependent(PlanningError):
    """Two members of an action layer interfere with each other."""


class NotTrailing(PlanningError):
    """The selected task node still has a predecessor."""


class WrongTask(PlanningError):
    """A resolver does not resolve the task of the selected node."""


class NotPrimitive(PlanningError):
    """An action was used on a compound task node."""


class NotCompound(PlanningError):
    """A method was used on a primitive task node."""


class CyclicOrdering(PlanningError):
    """A precedence relation contains a cycle."""

    def __init__(self, message: str, witness: list | tuple = ()):
        super().__init__(message)
        self.witness = list(witness)


class EmptyLayer(PlanningError):
    """A layer switch was requested while the current layer is empty."""


# frontend -----------------------------------------------------------------

class HddlError(PlanningError):
    """Problem in an HDDL or PDDL input file."""


class HddlSyntaxError(HddlError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class UnsupportedFeature(HddlError):
    """The input uses a construct outside the supported subset."""


class ResolutionError(HddlError):
    """A name (object, type, predicate, task, label) could not be resolved."""


class OrderingCycle(HddlError, CyclicOrdering):
    def __init__(self, message: str, witness: list | tuple = ()):
        CyclicOrdering.__init__(self, message + ": " + " < ".join(map(str, witness)), witness)


# search / solving ---------------------------------------------------------

class ResourceExhausted(PlanningError):
    """A node or time budget ran out before the search space was exhausted."""


# encoder ------------------------------------------------------------------

class NonCrescentAssignment(PlanningError):
    pass


class NotEnoughHolders(PlanningError):
    pass


class CompileThresholdExceeded(PlanningError):
    pass


# pipeline -----------------------------------------------------------------

class UnknownAction(PlanningError):
    pass


class MissingTrace(PlanningError):
    pass


class EmptyProblemSet(PlanningError):
    pass
