"""Exception types shared across the package."""


class SympredError(Exception):
    """Base class for package-specific errors."""


class DataError(SympredError, ValueError):
    """Invalid input data: bad CSV schema, out-of-range values, bad records."""


class ModelFormatError(DataError):
    """A persisted model file is unreadable: wrong version or corrupted."""


class NumericError(SympredError, RuntimeError):
    """Training produced non-finite values."""
