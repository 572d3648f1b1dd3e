"""
ReliaSpan - Exception Hierarchy
"""


class ReliaSpanError(Exception):
    """Base class for all library errors"""


class InvalidInputError(ReliaSpanError, ValueError):
    """Raised when an operation's precondition on its arguments does not hold"""


class UndefinedLossError(InvalidInputError):
    """Raised when a loss rate is requested for an empty attack (division by |B|)"""


class SerializationError(InvalidInputError):
    """Raised when a JSON document cannot be read, parsed or validated"""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class VerifierDefectError(ReliaSpanError):
    """Raised when an output fails an invariant that must hold unconditionally"""
