"""Provide result objects for rearranged-expansions experiments.

Tables and curves are plain frozen records; `RunResult` wraps the files a
subcommand wrote, similar to how `requests.Response` wraps a download.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

from .constants import ORDER_LABELS, CurveDomain, norm_label
from .core.rearrangement import GridFunction

BYTES_PER_UNIT = 1024


def improvement_ratio(rearranged: float, original: float) -> float:
    """Return ``rearranged / original``, defined as 1.0 when the original is 0."""
    if original == 0.0:
        return 1.0
    return rearranged / original


@dataclass(frozen=True)
class ErrorRow:
    """Define one ``(n, p)`` row of an error table."""

    sample_size: int
    norm: float
    baseline: float
    expansion: float
    rearranged: float

    @property
    def ratio(self) -> float:
        return improvement_ratio(self.rearranged, self.expansion)

    @property
    def norm_label(self) -> str:
        return norm_label(self.norm)


@dataclass(frozen=True)
class ErrorReport:
    """Define an error table for one domain (distribution or quantile).

    ``baseline_order`` is the low-order reference column (first order by
    default); ``expansion_order`` is the approximation that gets rearranged.
    """

    domain: CurveDomain
    baseline_order: int
    expansion_order: int
    rows: tuple[ErrorRow, ...]
    weight: str | None = None

    @property
    def columns(self) -> tuple[str, ...]:
        return (
            "n",
            "p",
            ORDER_LABELS[self.baseline_order],
            ORDER_LABELS[self.expansion_order],
            "rearranged",
            "ratio",
        )

    def row(self, sample_size: int, norm: float) -> ErrorRow:
        """Return the row for ``(sample_size, norm)``.

        Raises:
            `KeyError`: If the table has no such row.

        """
        for candidate in self.rows:
            if candidate.sample_size == sample_size and (
                candidate.norm == norm
                or (math.isinf(candidate.norm) and math.isinf(norm))
            ):
                return candidate
        raise KeyError((sample_size, norm))

    def sample_sizes(self) -> list[int]:
        return sorted({row.sample_size for row in self.rows})

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[ErrorRow]:
        return iter(self.rows)


@dataclass(frozen=True)
class CouplingResult:
    """Define the restricted Lp coupling moments of raw and rearranged expansions."""

    raw_moment: float
    rearranged_moment: float
    std_error: float
    kept_fraction: float = 1.0

    @property
    def improved(self) -> bool:
        """Return True when the rearranged moment is within 2 SE of the raw one."""
        return self.rearranged_moment <= self.raw_moment + 2.0 * self.std_error


@dataclass(frozen=True)
class CouplingRow:
    """Define one ``(n, J, p)`` row of the coupling table."""

    sample_size: int
    order: int
    norm: float
    result: CouplingResult


@dataclass(frozen=True)
class CurveTable:
    """Define the curves of one sample size on one domain.

    ``approximations`` maps each expansion order to its curve; ``rearranged``
    is the increasing rearrangement of the highest order and
    ``weighted_rearranged`` its weighted counterpart when a weight is set.
    """

    domain: CurveDomain
    sample_size: int
    truth: GridFunction
    approximations: dict[int, GridFunction]
    rearranged: GridFunction
    weighted_rearranged: GridFunction | None = None

    @property
    def expansion_order(self) -> int:
        return max(self.approximations)

    @property
    def columns(self) -> tuple[str, ...]:
        axis = "x" if self.domain is CurveDomain.CDF else "u"
        names = [axis, "truth"]
        names.extend(ORDER_LABELS[order] for order in sorted(self.approximations))
        names.append(f"rearranged_{ORDER_LABELS[self.expansion_order]}")
        if self.weighted_rearranged is not None:
            names.append(f"weighted_rearranged_{ORDER_LABELS[self.expansion_order]}")
        return tuple(names)

    def column_values(self) -> list[list[float]]:
        """Return the table column by column, in `columns` order."""
        values = [self.truth.nodes().tolist(), self.truth.values.tolist()]
        for order in sorted(self.approximations):
            values.append(self.approximations[order].values.tolist())
        values.append(self.rearranged.values.tolist())
        if self.weighted_rearranged is not None:
            values.append(self.weighted_rearranged.values.tolist())
        return values


@dataclass
class RunResult:
    """Define the files one subcommand produced."""

    command: str
    output_dir: Path
    files: list[Path] = field(default_factory=list)

    @property
    def total_size(self) -> int:
        """Return the combined size of the written files in bytes."""
        total = 0
        for path in self.files:
            try:
                total += path.stat().st_size
            except OSError:
                continue
        return total

    @property
    def size_human(self) -> str:
        """Return the combined file size in human-readable format."""
        size = float(self.total_size)
        for unit in ["B", "KB", "MB"]:
            if size < BYTES_PER_UNIT:
                return f"{size:.1f} {unit}"
            size /= BYTES_PER_UNIT
        return f"{size:.1f} GB"

    def __len__(self) -> int:
        return len(self.files)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.files)

    def __str__(self) -> str:
        """Return a short summary of the run."""
        return (
            f"{self.command}: {len(self.files)} file(s) in {self.output_dir} "
            f"({self.size_human})"
        )


__all__ = [
    "CouplingResult",
    "CouplingRow",
    "CurveTable",
    "ErrorReport",
    "ErrorRow",
    "RunResult",
    "improvement_ratio",
]
