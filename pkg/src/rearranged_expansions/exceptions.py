"""Define the exception hierarchy for rearranged-expansions.

## Error Handling Pattern

The numerical core is made of pure functions that fail fast: a bad argument
raises immediately instead of producing a NaN that surfaces three modules
later.

**Domain errors** (`DomainError`) signal an argument outside the mathematical
domain of an operation: a probability of exactly 0 or 1 handed to a quantile
function, a non-positive Gamma shape, an expansion order outside ``{1, 2, 3}``.

**Contract errors** (`ContractError`) signal that two well-formed inputs do not
fit together: error norms between grid functions sampled on different meshes,
or a sorting step asked to exchange an already ordered pair.

Both inherit from `ValueError` so callers that only know the standard library
still catch them:

```python
try:
    x = std_normal_quantile(1.0)
except DomainError as exc:
    print(exc.parameter, exc.value)
```

All exceptions inherit from `RearrangementError`, so a single except clause
catches every library-specific failure:

```python
try:
    run_table(config)
except RearrangementError as exc:
    print(f"Error: {exc}")
```
"""

from __future__ import annotations

import os
from typing import Any


class RearrangementError(Exception):
    """Define the base exception for all rearranged-expansions errors."""

    def __init__(
        self,
        message: str,
        *,
        context: dict[str, Any] | None = None,
        filename: str | None = None,
    ) -> None:
        """Initialize the exception with a message and optional context."""
        super().__init__(message)
        self.message = message
        self.context = context or {}
        self.filename = filename

    def __str__(self) -> str:
        """Return a formatted error message with filename and context."""
        base_msg = self.message
        if self.filename:
            base_msg = f"{self.filename}: {base_msg}"
        if self.context:
            context_str = ", ".join(f"{k}={v}" for k, v in self.context.items())
            base_msg = f"{base_msg} (context: {context_str})"
        return base_msg


class DomainError(RearrangementError, ValueError):
    """Raise when an argument lies outside an operation's numerical domain."""

    def __init__(
        self,
        message: str,
        *,
        parameter: str | None = None,
        value: Any | None = None,
        **kwargs: Any,
    ) -> None:
        """Initialize with the offending parameter name and value."""
        super().__init__(message, **kwargs)
        self.parameter = parameter
        self.value = value

    def __str__(self) -> str:
        """Return a formatted error message with the parameter name."""
        base_msg = super().__str__()
        if self.parameter:
            base_msg = f"{base_msg} (parameter={self.parameter})"
        return base_msg


class ContractError(RearrangementError, ValueError):
    """Raise when inputs are individually valid but incompatible."""


class UnsupportedOracleError(RearrangementError):
    """Raise when a closed-form truth oracle does not exist for a population.

    Lognormal sample means have no closed-form distribution function; the
    Monte Carlo oracle has to be used instead.
    """

    def __init__(
        self,
        message: str,
        *,
        oracle: str | None = None,
        population: str | None = None,
        **kwargs: Any,
    ) -> None:
        """Initialize with the missing oracle and population family."""
        super().__init__(message, **kwargs)
        self.oracle = oracle
        self.population = population


class ConfigurationError(RearrangementError):
    """Raise when an experiment configuration is invalid."""

    def __init__(
        self,
        message: str,
        *,
        config_key: str | None = None,
        config_value: Any | None = None,
        **kwargs: Any,
    ) -> None:
        """Initialize with message and optional config details."""
        super().__init__(message, **kwargs)
        self.config_key = config_key
        self.config_value = config_value

    def __str__(self) -> str:
        """Return a formatted error message with the config key."""
        base_msg = super().__str__()
        if self.config_key:
            base_msg = f"{base_msg} (config_key={self.config_key})"
        return base_msg


class FileSystemError(RearrangementError):
    """Raise when reading or writing experiment files fails."""

    def __init__(
        self,
        message: str,
        *,
        path: str | os.PathLike[str] | None = None,
        operation: str | None = None,
        **kwargs: Any,
    ) -> None:
        """Initialize the filesystem error with a message and optional path.

        Args:
            message: Error message.
            path: File path (accepts str or Path objects).
            operation: Operation type (read, write, etc.).
            **kwargs: Additional context passed to base exception.

        """
        super().__init__(message, **kwargs)
        self.path = str(path) if path is not None else None
        self.operation = operation


__all__ = [
    "RearrangementError",
    "DomainError",
    "ContractError",
    "UnsupportedOracleError",
    "ConfigurationError",
    "FileSystemError",
]
