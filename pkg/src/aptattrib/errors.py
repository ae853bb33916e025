"""Exception hierarchy; the CLI maps each base class to an exit code."""


class AttributionError(Exception):
    """Base class for all package errors."""


class UsageError(AttributionError):
    """Bad arguments or configuration (exit code 1)."""


class DataError(AttributionError):
    """Malformed or inconsistent input data (exit code 2)."""


class NetworkError(AttributionError):
    """Transport failure talking to an external endpoint (exit code 3)."""
