"""Exception types shared across the package."""


class FairDeltaError(Exception):
    """Base class for errors raised by fairdelta."""


class ValidationError(FairDeltaError, ValueError):
    """Invalid argument, schema or configuration value."""


class DataError(FairDeltaError):
    """Input data cannot be turned into a usable dataset or model."""
