"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConsistencyError(AssertionError):
    """Two independent characterizations of the same quantity disagree."""


class DegeneracyError(RuntimeError):
    """The evolution hit a node where T_{m-1}(u_xx) fell below the floor.

    Carries the failing node, the violated condition and whatever part of the
    evolution trace was accumulated before the failure.
    """

    def __init__(self, message, node=None, condition=None, step=None, trace=None):
        super().__init__(message)
        self.node = node
        self.condition = condition
        self.step = step
        self.trace = trace


class ConfigError(ValueError):
    """Invalid scenario configuration or expression."""

    def __init__(self, message, position=None):
        self.detail = message
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
