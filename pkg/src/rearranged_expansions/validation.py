"""Provide validation functions for experiment settings and files.

These functions coerce raw config values (strings from flags or files,
numbers from YAML) into typed settings, raising a `ConfigurationError` that
names the offending key, or a `FileSystemError` for bad paths.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

from .constants import MAX_EXPANSION_ORDER, PopulationFamily, WeightKind
from .core.distributions import GammaPopulation, LogNormalPopulation, Population
from .exceptions import ConfigurationError, DomainError, FileSystemError

POPULATION_PARTS = 3


def coerce_number(value: Any, *, key: str) -> float | int:
    """Return ``value`` as an int when integral, else a float.

    Raises:
        `ConfigurationError`: If the value is not numeric.

    """
    if isinstance(value, bool):
        raise ConfigurationError(
            f"{key} must be numeric. Got bool value {value!r}",
            config_key=key,
            config_value=value,
        )
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        stripped = value.strip()
        if not stripped:
            raise ConfigurationError(
                f"{key} must be numeric. Got empty string.", config_key=key
            )
        try:
            number = float(stripped)
        except ValueError as exc:
            raise ConfigurationError(
                f"{key} must be numeric. Got {value!r}",
                config_key=key,
                config_value=value,
            ) from exc
        if math.isfinite(number) and number.is_integer() and "." not in stripped:
            return int(number)
        return number
    raise ConfigurationError(
        f"{key} must be numeric. Got {type(value).__name__}",
        config_key=key,
        config_value=value,
    )


def parse_int(value: Any, *, key: str, minimum: int = 1) -> int:
    """Return ``value`` as an integer not below ``minimum``."""
    number = coerce_number(value, key=key)
    if not float(number).is_integer():
        raise ConfigurationError(
            f"{key} must be an integer. Got {value!r}",
            config_key=key,
            config_value=value,
        )
    if number < minimum:
        raise ConfigurationError(
            f"{key} must be at least {minimum}. Got {value!r}",
            config_key=key,
            config_value=value,
        )
    return int(number)


def parse_int_list(value: Any, *, key: str, minimum: int = 1) -> tuple[int, ...]:
    """Return a comma-separated list (or YAML sequence) as a tuple of integers."""
    if isinstance(value, (list, tuple)):
        items: list[Any] = list(value)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        items = [value]
    elif isinstance(value, str):
        items = [part for part in value.split(",") if part.strip()]
    else:
        raise ConfigurationError(
            f"{key} must be a comma-separated list of integers",
            config_key=key,
            config_value=value,
        )
    if not items:
        raise ConfigurationError(f"{key} cannot be empty", config_key=key)
    return tuple(parse_int(item, key=key, minimum=minimum) for item in items)


def parse_orders(value: Any, *, key: str = "order") -> tuple[int, ...]:
    """Return the expansion orders, each in ``1..3``, in the given sequence."""
    orders = parse_int_list(value, key=key)
    bad = [order for order in orders if order > MAX_EXPANSION_ORDER]
    if bad:
        raise ConfigurationError(
            f"{key} values must lie in 1..{MAX_EXPANSION_ORDER}; got {bad}",
            config_key=key,
            config_value=value,
        )
    if len(set(orders)) != len(orders):
        raise ConfigurationError(
            f"{key} values must be distinct", config_key=key, config_value=value
        )
    return orders


def parse_interval(value: Any, *, key: str) -> tuple[float, float]:
    """Return a ``LO:HI`` string (or two-item sequence) as an ordered pair."""
    if isinstance(value, (list, tuple)):
        parts = list(value)
    elif isinstance(value, str):
        parts = value.split(":")
    else:
        parts = []
    if len(parts) != 2:  # noqa: PLR2004
        raise ConfigurationError(
            f"{key} must look like LO:HI. Got {value!r}",
            config_key=key,
            config_value=value,
        )
    lower = float(coerce_number(parts[0], key=key))
    upper = float(coerce_number(parts[1], key=key))
    if not (math.isfinite(lower) and math.isfinite(upper) and lower < upper):
        raise ConfigurationError(
            f"{key} needs finite bounds with LO < HI. Got {value!r}",
            config_key=key,
            config_value=value,
        )
    return lower, upper


def parse_population(value: Any, *, key: str = "population") -> Population:
    """Return a population from ``gamma:SHAPE:SCALE`` or ``lognormal:MU:SIGMA``.

    Raises:
        `ConfigurationError`: If the family or a parameter is invalid.

    """
    if isinstance(value, (GammaPopulation, LogNormalPopulation)):
        return value
    if not isinstance(value, str):
        raise ConfigurationError(
            f"{key} must be a string like gamma:SHAPE:SCALE",
            config_key=key,
            config_value=value,
        )
    parts = [part.strip() for part in value.split(":")]
    if len(parts) != POPULATION_PARTS:
        raise ConfigurationError(
            f"{key} must be gamma:SHAPE:SCALE or lognormal:MU:SIGMA. Got {value!r}",
            config_key=key,
            config_value=value,
        )
    try:
        family = PopulationFamily.normalize(parts[0], param_name=key)
    except ValueError as exc:
        raise ConfigurationError(str(exc), config_key=key, config_value=value) from exc
    first = float(coerce_number(parts[1], key=key))
    second = float(coerce_number(parts[2], key=key))
    try:
        if family is PopulationFamily.GAMMA:
            return GammaPopulation(shape=first, scale=second)
        return LogNormalPopulation(mu=first, sigma=second)
    except DomainError as exc:
        raise ConfigurationError(
            f"Invalid {family.value} parameters: {exc.message}",
            config_key=key,
            config_value=value,
        ) from exc


def parse_weight(value: Any, *, key: str = "weight") -> WeightKind:
    """Return the weight family named by ``value``."""
    if isinstance(value, WeightKind):
        return value
    if value is None:
        return WeightKind.NONE
    normalized = str(value).strip().lower()
    try:
        return WeightKind(normalized)
    except ValueError as exc:
        raise ConfigurationError(
            f"Unsupported {key}: {value!r}. "
            f"Supported weights: {', '.join(sorted(WeightKind.values()))}",
            config_key=key,
            config_value=value,
        ) from exc


def validate_file_path(
    file_path: str | Path,
    *,
    must_exist: bool = True,
    allowed_extensions: tuple[str, ...] | None = None,
) -> Path:
    """Validate a file path.

    Args:
        file_path: Path to validate.
        must_exist: If `True`, the path must exist and be a file.
        allowed_extensions: If provided, the file must have one of these extensions.

    Returns:
        Validated `Path` object.

    Raises:
        `FileSystemError`: If path validation fails.

    """
    if not file_path:
        raise FileSystemError("File path cannot be empty")
    path = Path(file_path)
    if must_exist:
        if not path.exists():
            raise FileSystemError(
                f"File does not exist: {path}", path=path, operation="read"
            )
        if not path.is_file():
            raise FileSystemError(f"Path is not a file: {path}", path=path)
    if allowed_extensions and path.suffix.lower() not in allowed_extensions:
        raise FileSystemError(
            f"Unsupported file extension '{path.suffix}'. "
            f"Allowed: {', '.join(allowed_extensions)}",
            path=path,
        )
    return path


__all__ = [
    "coerce_number",
    "parse_int",
    "parse_int_list",
    "parse_interval",
    "parse_orders",
    "parse_population",
    "parse_weight",
    "validate_file_path",
]
