"""Shared exception types."""


class StabcoverError(Exception):
    """Base class for library errors."""


class CapExceededError(StabcoverError):
    """An enumeration or search exceeded its configured cap.

    Callers that can degrade gracefully (tri-state classification fields)
    catch this and report "indeterminate" instead of failing.
    """

    def __init__(self, what: str, needed, cap):
        super().__init__(f"{what}: needed {needed}, cap {cap}")
        self.what = what
        self.needed = needed
        self.cap = cap


class DomainError(StabcoverError):
    """A precondition on an argument was violated."""
