"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes (config 2, data/shape/metric 3,
numerical 4); library callers can catch ``TccmError`` for everything.
"""


class TccmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TccmError):
    """Invalid configuration value (bad flag, epochs < 1, odd embed dim, ...)."""


class DomainError(ConfigError):
    """Scalar argument outside its mathematical domain (e.g. t_fixed not in (0,1])."""


class DataFormatError(TccmError):
    """Malformed input file: missing header/label column, unparseable cell, ..."""


class DimensionError(TccmError):
    """Shape mismatch between arrays, model, and data."""


class MetricError(TccmError):
    """Metric preconditions violated (single-class labels, empty truth sets)."""


class NumericalError(TccmError):
    """Non-finite values or non-convergence in numerical routines."""
