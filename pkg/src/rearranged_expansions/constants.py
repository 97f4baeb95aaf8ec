"""Centralize constants and enums for rearranged-expansions."""

from __future__ import annotations

import math
from enum import Enum
from typing import Final


class PopulationFamily(str, Enum):
    """Define the supported population families."""

    GAMMA = "gamma"
    LOGNORMAL = "lognormal"

    @classmethod
    def values(cls) -> set[str]:
        """Return a set of all family values."""
        return {member.value for member in cls}

    @classmethod
    def normalize(
        cls, value: str | PopulationFamily, *, param_name: str | None = None
    ) -> PopulationFamily:
        """Convert arbitrary input into a `PopulationFamily` member.

        Raises:
            `ValueError`: If the value names no supported family.
            `TypeError`: If value is neither a string nor `PopulationFamily`.

        """
        if isinstance(value, cls):
            return value
        if not isinstance(value, str):
            raise TypeError(
                f"Population family must be a string or PopulationFamily, "
                f"got {type(value)}"
            )
        normalized = value.strip().lower()
        try:
            return cls(normalized)
        except ValueError as exc:
            label = f"{param_name} " if param_name else ""
            raise ValueError(
                f"Unsupported {label}family: {value}. "
                f"Supported families: {', '.join(sorted(cls.values()))}"
            ) from exc


class WeightKind(str, Enum):
    """Define the weight measures available for weighted rearrangement."""

    NONE = "none"
    UNIFORM = "uniform"
    NORMAL = "normal"
    FILE = "file"
    ITERATED = "iterated"
    TRUTH = "truth"

    @classmethod
    def values(cls) -> set[str]:
        """Return a set of all weight values."""
        return {member.value for member in cls}


class CurveDomain(str, Enum):
    """Define which function an approximation targets."""

    CDF = "cdf"
    QUANTILE = "quantile"


class Subcommand(str, Enum):
    """Define the CLI subcommands."""

    CURVES = "curves"
    TABLE = "table"
    COUPLING = "coupling"


# Exit codes
EXIT_SUCCESS: Final[int] = 0
EXIT_FAILURE: Final[int] = 1
EXIT_CONFIG_ERROR: Final[int] = 2
EXIT_NUMERIC_ERROR: Final[int] = 3
EXIT_IO_ERROR: Final[int] = 4
EXIT_KEYBOARD_INTERRUPT: Final[int] = 130

# Norms reported in the error tables
TABLE_NORMS: Final[tuple[float, ...]] = (1.0, 2.0, 3.0, 4.0, math.inf)
COUPLING_NORMS: Final[tuple[float, ...]] = (1.0, 2.0)
MAX_EXPANSION_ORDER: Final[int] = 3
ORDER_LABELS: Final[dict[int, str]] = {
    1: "first_order",
    2: "second_order",
    3: "third_order",
}

# Default experiment values
DEFAULT_POPULATION: Final[str] = "gamma:0.0625:16"
DEFAULT_SAMPLE_SIZES: Final[tuple[int, ...]] = (4, 8, 16, 32)
DEFAULT_ORDERS: Final[tuple[int, ...]] = (1, 3)
DEFAULT_CDF_INTERVAL: Final[tuple[float, float]] = (-3.0, 3.0)
DEFAULT_Q_INTERVAL: Final[tuple[float, float]] = (0.005, 0.995)
DEFAULT_MESH: Final[int] = 1001
MIN_REPORT_MESH: Final[int] = 101
DEFAULT_DRAWS: Final[int] = 1_000_000
FIGURE_DRAWS: Final[int] = 10_000_000
MIN_COUPLING_DRAWS: Final[int] = 10_000
DEFAULT_SEED: Final[int] = 20070801
DEFAULT_OUTPUT_DIR: Final[str] = "results"
DEFAULT_WEIGHT_ITERATIONS: Final[int] = 1
ITERATED_WEIGHT_UNIFORM_SHARE: Final[float] = 0.1
DEFAULT_LOGNORMAL_SAMPLE_SIZE: Final[int] = 5

# CSV output
CSV_SIGNIFICANT_DIGITS: Final[int] = 12
CONFIG_SNAPSHOT_NAME: Final[str] = "effective_config.yaml"
CDF_TABLE_NAME: Final[str] = "cdf_errors.csv"
QUANTILE_TABLE_NAME: Final[str] = "quantile_errors.csv"
CDF_WEIGHTED_TABLE_NAME: Final[str] = "cdf_weighted_errors.csv"
QUANTILE_WEIGHTED_TABLE_NAME: Final[str] = "quantile_weighted_errors.csv"
COUPLING_TABLE_NAME: Final[str] = "coupling.csv"
YAML_EXTENSIONS: Final[tuple[str, ...]] = (".yaml", ".yml")


def norm_label(p: float) -> str:
    """Return the table label for an Lp norm (``"1"``, ``"2"``, ``"inf"``)."""
    if math.isinf(p):
        return "inf"
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def parse_norm_label(label: str) -> float:
    """Invert `norm_label`."""
    stripped = label.strip().lower()
    if stripped in {"inf", "infinity", "∞"}:
        return math.inf
    return float(stripped)
