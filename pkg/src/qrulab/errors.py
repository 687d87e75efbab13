"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage problems (bad flags, unknown
config keys) exit 1, data problems exit 2, numeric failures exit 3.
Plain ValueError marks contract violations at library boundaries.
"""

from __future__ import annotations


class QrulabError(Exception):
    """Base class for package-specific failures."""


class LayoutError(QrulabError, ValueError):
    """Shape or parameter-layout mismatch (wrong vector length, slice size...)."""


class DataError(QrulabError):
    """Malformed input data; carries a human-readable location."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class StateError(QrulabError):
    """Operation applied to a value in the wrong state (e.g. normalizing twice)."""


class ConfigError(QrulabError):
    """Bad config file content or unusable flag combination."""


class NumericFailure(QrulabError):
    """Numerical breakdown (singular solve, non-finite objective)."""
