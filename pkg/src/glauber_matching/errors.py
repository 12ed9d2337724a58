"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Infeasible or out-of-range parameters."""


class GraphParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(RuntimeError):
    """A configured cap (states, cut size, step horizon) was exceeded."""

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class InvariantError(AssertionError):
    """An internal consistency check failed."""
