"""Exception types shared across the package.

All library errors derive from :class:`OlcvarError` so callers (and the CLI)
can distinguish domain failures from programming errors.
"""


class OlcvarError(Exception):
    """Base class for every error raised by this package."""


class ParseError(OlcvarError):
    """An input document is malformed (bad JSON/XML, missing or mistyped keys)."""


class UnsupportedElementError(ParseError):
    """A document uses an element outside the supported subset."""

    def __init__(self, element: str, detail: str = ""):
        self.element = element
        message = f"unsupported element: {element}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class StructureError(OlcvarError):
    """A structural invariant of a model or diagram is violated."""


class InvalidSyncError(OlcvarError):
    """A synchronization spec references missing, ambiguous, or conflicting transitions."""


class ExplosionError(OlcvarError):
    """Trace enumeration exceeded the configured execution cap."""


class NoContextError(OlcvarError):
    """A break fragment has no effect-bearing message before or after it."""


class NotAdjacentError(OlcvarError):
    """No lifecycle state sits between the given context transitions."""


class AmbiguousPositionError(OlcvarError):
    """Several lifecycle states match the given context transitions."""


class DuplicateTransitionError(OlcvarError):
    """The exceptional transition to insert already exists in the adapted lifecycle."""


class UnknownBcfError(OlcvarError):
    """The selected break fragment id does not occur in the sequence diagram."""


class HostNotFoundError(OlcvarError):
    """No task in the process model leaves the anchor state."""


class AmbiguousHostError(OlcvarError):
    """More than one task in the process model leaves the anchor state."""
