"""Shared exception types.

The CLI maps these onto stable exit codes; library callers can catch the
specific class they care about.
"""


class FieldMismatchError(ValueError):
    """Two operands belong to different field specs."""


class InvalidParameterError(ValueError):
    """An argument is out of its documented domain."""


class UnsupportedParameterError(InvalidParameterError):
    """A value that is valid in principle but outside what this build supports
    (e.g. non-power-of-two side length for broadcast scheduling)."""


class NotAcyclicError(InvalidParameterError):
    """A coded network contains a directed cycle; only the delay-free acyclic
    case is handled here."""


class StructuralError(RuntimeError):
    """An internal structure violates a construction invariant (builder bug)."""


class ParseError(ValueError):
    """A structured text file failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class VerificationError(RuntimeError):
    """A run-level verification (all-to-all coverage, topology check) failed."""
