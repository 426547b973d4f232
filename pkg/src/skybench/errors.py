"""Shared exception types."""


class DataError(ValueError):
    """Invalid or inconsistent input data (CLI exit code 2)."""
