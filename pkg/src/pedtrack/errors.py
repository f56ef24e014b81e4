"""Exception hierarchy shared across the pipeline.

UsageError maps to exit code 1 (bad invocation or configuration),
DataError to exit code 2 (unreadable or inconsistent input data).
"""


class PedtrackError(Exception):
    """Base class for all pipeline errors."""


class UsageError(PedtrackError):
    """Invalid invocation: bad flags, unknown names, malformed configuration."""


class DataError(PedtrackError):
    """Input data cannot be read or is internally inconsistent."""


class DecodeError(DataError):
    """Malformed image bytes. Carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.message = message
        self.offset = offset


class SequenceError(DataError):
    """A frame directory cannot be assembled into a contiguous sequence."""


class ScriptError(DataError):
    """A scenario script file cannot be parsed or is inconsistent."""


class EmptyObjectError(PedtrackError):
    """A center of mass was requested over a region with no qualifying pixels."""


class RefinementError(PedtrackError):
    """Candidate refinement recentered onto a region with no qualifying pixels."""
