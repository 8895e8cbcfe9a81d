"""Shared exception types."""


class ParamdocError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ParamdocError):
    """A document could not be parsed; carries a human-readable locus."""

    def __init__(self, message, locus=None):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


class ValidationError(ParamdocError):
    """A parsed document violates a structural invariant."""


class ConflictError(ParamdocError):
    """Two inputs claim the same identity with different content."""


class NotFoundError(ParamdocError):
    """A referenced api/parameter/name does not exist."""


class TrainingError(ParamdocError):
    """Optimization produced a non-finite loss."""
