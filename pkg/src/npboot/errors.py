"""Exception types shared across the package."""


class NpbootError(Exception):
    """Base class for package errors."""


class ConfigurationError(NpbootError, ValueError):
    """Invalid configuration detected before any computation starts."""


class DataFormatError(NpbootError, ValueError):
    """Malformed input data (bad cell, bad label, zero-variance column)."""


class NumericalError(NpbootError, RuntimeError):
    """A computation produced non-finite or degenerate values.

    ``context`` optionally pins the failure to an atom, iteration, or
    sample index.
    """

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context


class ComponentCollapseError(NumericalError):
    """A mixture component lost essentially all responsibility mass."""

    def __init__(self, message, component=None):
        super().__init__(message, context=component)
        self.component = component
