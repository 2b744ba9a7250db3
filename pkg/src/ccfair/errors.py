class InvalidArgumentError(ValueError):
    """Input outside an operation's domain."""


class CapacityError(RuntimeError):
    """A configured state or row cap was exceeded; never a silent truncation."""

    def __init__(self, message: str, cap: int, size: int):
        super().__init__(f"{message} (cap={cap}, size={size})")
        self.cap = cap
        self.size = size


class ConsistencyError(RuntimeError):
    """An internal invariant failed; indicates a bug, not bad input."""
