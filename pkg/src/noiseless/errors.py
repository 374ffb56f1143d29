"""Exception types shared across the package."""


class DomainError(ValueError):
    """A value lies outside the range it was declared to belong to."""


class PreconditionError(ValueError):
    """An operation was called on inputs it does not support."""


class SearchLimitError(RuntimeError):
    """An exhaustive search would exceed its configured size cap."""

    def __init__(self, size, cap):
        super().__init__(f"search space has {size} nodes, exceeding the cap of {cap}")
        self.size = size
        self.cap = cap


class InvariantViolation(AssertionError):
    """An internal invariant that should hold by construction did not."""
