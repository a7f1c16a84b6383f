"""Exception hierarchy shared across the package."""


class GrassclustError(Exception):
    """Base class for all package errors."""


class InputError(GrassclustError, ValueError):
    """Malformed or inconsistent input data."""


class ConfigError(GrassclustError, ValueError):
    """Invalid parameter or configuration value."""


class OutOfRangeError(InputError, IndexError):
    """A window needs a sample index outside the available data."""

    def __init__(self, msg, missing_index=None):
        super().__init__(msg)
        self.missing_index = missing_index


class DegenerateDataError(GrassclustError, ArithmeticError):
    """Data lacks the structure an operation needs (rank deficiency, empty graph, ...)."""


class CutLocusError(DegenerateDataError):
    """Log map requested for a point on (or numerically at) the cut locus."""
