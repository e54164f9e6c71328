"""Exception hierarchy shared across the package."""


class StancePropError(Exception):
    """Base class for all errors raised by this package."""


class DataError(StancePropError):
    """Malformed or invalid input data (non-finite features, bad records)."""


class ParameterError(StancePropError, ValueError):
    """A hyper-parameter or configuration value is out of its valid range."""


class SeedingError(StancePropError):
    """Propagation was requested without any labelled seed rows."""


class IsolatedNodeError(StancePropError):
    """A graph operation hit a zero-degree node it cannot handle."""

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"node {row} has zero degree (isolated)")


class IngestError(DataError):
    """Dataset ingestion failed; the message names the offending record."""
