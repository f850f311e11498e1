"""Shared exception types, mapped to CLI exit codes."""


class ValidationError(ValueError):
    """Bad input data or configuration (CLI exit code 1)."""


class MissingArtifactError(FileNotFoundError):
    """A required upstream artifact does not exist (CLI exit code 2)."""


class NumericError(RuntimeError):
    """A numeric computation produced non-finite values (CLI exit code 3)."""
