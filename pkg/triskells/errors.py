"""Exception hierarchy shared by every triskells module.

Library code raises these; only the command line turns them into exit codes.
"""

from typing import List, Optional


class TriskellError(Exception):
    """Base class for all errors raised by the library."""


class MonoidMismatch(TriskellError):
    """Two weights or triskells tagged with different monoids were combined."""


class InvalidWeight(TriskellError):
    """A payload is not an element of the monoid it is tagged with."""


class UnsignedMonoid(TriskellError):
    """A signed operation was requested on a monoid without sign structure."""


class NoAddition(TriskellError):
    """The monoid has no addition, so parallel edges cannot be contracted."""


class CarrierMismatch(TriskellError):
    """Carriers do not line up (composition, union, traces, minors)."""


class InvalidTriskell(TriskellError):
    """A triskell or carrier violates its structural invariants."""


class NonNilpotentExecution(TriskellError):
    """The hidden part of an execution contains a cycle."""

    def __init__(self, witness: List[str]):
        self.witness = list(witness)
        super().__init__("non-nilpotent execution, cycle: " + " -> ".join(self.witness))


class SeriesDivergence(TriskellError):
    """A series did not meet its tolerance within the configured term budget."""


class NoConvergence(TriskellError):
    """A numerical routine (an SVD) did not converge."""


class BoundExceeded(TriskellError):
    """A carrier, dimension or degree exceeds its configured bound."""


class MeasureError(TriskellError):
    """A measure map cannot be applied or lacks a required property."""


class ProofSyntaxError(TriskellError):
    """Proof text does not follow the grammar."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class ProofTypingError(TriskellError):
    """A proof rule was applied to premises of the wrong shape."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class InterpretationError(TriskellError):
    """A proof could not be interpreted (a cut did not execute)."""


class FormatError(TriskellError):
    """A serialized document is malformed."""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SpecMismatch(TriskellError):
    """Coherence spaces built over different orthogonality specs were combined."""


class UnknownSuite(TriskellError):
    """No check suite is registered under the requested name."""
