"""Exception types shared across the pipeline.

The CLI maps each class onto a process exit code.
"""

from __future__ import annotations


class QupwmError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 3
    kind = "internal"


class ConfigError(QupwmError, ValueError):
    """Invalid configuration value.

    ``field`` names the offending setting (dotted path, e.g. ``quantizer.levels``)
    so front ends can emit a targeted diagnostic.
    """

    exit_code = 1
    kind = "config"

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class DataError(QupwmError, ValueError):
    """Malformed, missing or inconsistent input data."""

    exit_code = 2
    kind = "data"


class InvariantError(QupwmError, RuntimeError):
    """An internal consistency check failed."""

    exit_code = 3
    kind = "invariant"
