"""Exception types shared across the package.

Configuration/parsing problems map to CLI exit code 2, numerical
failures (divergence, instability, lost constraints) to exit code 3.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ParseError(ConfigError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class DivergenceError(RuntimeError):
    """Non-finite value produced while integrating or training."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class InstabilityError(DivergenceError):
    """Closed-loop state left the admissible region."""


class ProjectionError(RuntimeError):
    """Constraint projection failed to converge."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class SingularConfigurationError(RuntimeError):
    """Saddle-point system is singular at the given configuration."""


class KinematicLockError(ValueError):
    """Requested configuration cannot be assembled (mechanism locks)."""
