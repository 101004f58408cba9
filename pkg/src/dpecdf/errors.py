"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class DataError(ValueError):
    """An input file could not be parsed into finite numeric data."""


class EstimationError(RuntimeError):
    """Minimum-distance fitting cannot proceed (e.g. degenerate sample)."""


class CalibrationError(ValueError):
    """A null-distribution table does not match the test it is used with."""


class ConfigError(ValueError):
    """A power-study configuration is invalid."""
