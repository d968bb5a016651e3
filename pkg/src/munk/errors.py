class ConfigError(ValueError):
    """Invalid hyperparameters or mutually inconsistent settings."""


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class ModelFormatError(ValueError):
    """A model file could not be parsed."""


class NotConvergedError(RuntimeError):
    """Raised when an operation requires a converged fixed point."""
