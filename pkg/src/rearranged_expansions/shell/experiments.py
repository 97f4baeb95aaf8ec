"""Shell layer for experiment runs - orchestrates I/O around the pure core.

This module contains the imperative shell that writes CSV tables and the
effective-config snapshot. All numerics are delegated to `core.metrics`;
planning is delegated to `core.experiment_plan`.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import sys
import tempfile
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, TextIO

from oyaml import safe_dump

from ..config import ExperimentConfig
from ..constants import (
    CONFIG_SNAPSHOT_NAME,
    CSV_SIGNIFICANT_DIGITS,
    CurveDomain,
    WeightKind,
    norm_label,
    parse_norm_label,
)
from ..core.distributions import SampleMeanModel
from ..core.experiment_plan import ExperimentPlan, ExperimentTask, TaskKind
from ..core.expansions import ExpansionSpec
from ..core.metrics import (
    EvalInterval,
    WeightChoice,
    coupling_mc,
    coupling_sample,
    curve_table,
    improvement_report,
)
from ..core.rearrangement import decreasing_pairs, is_nondecreasing
from ..exceptions import FileSystemError
from ..result import CouplingRow, ErrorReport, RunResult
from ..validation import validate_file_path

logger = logging.getLogger(__name__)

CellValue = int | float | str
COUPLING_COLUMNS: tuple[str, ...] = (
    "n",
    "J",
    "p",
    "raw_moment",
    "rearranged_moment",
    "std_error",
)


def format_value(value: CellValue) -> str:
    """Return a locale-independent CSV cell with 12 significant digits."""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, f".{CSV_SIGNIFICANT_DIGITS}g")


def render_csv(
    columns: Sequence[str],
    rows: Iterable[Sequence[CellValue]],
    metadata: dict[str, str],
) -> str:
    """Return ``#`` metadata lines, one header line and the formatted rows."""
    buffer = io.StringIO()
    for key, value in metadata.items():
        buffer.write(f"# {key} = {value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(cell) for cell in row])
    return buffer.getvalue()


@dataclass(frozen=True)
class CsvTable:
    """Define a CSV file read back from disk."""

    metadata: dict[str, str]
    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def column(self, name: str) -> list[float]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def _parse_cell(text: str, column: str) -> float:
    if column == "p":
        return parse_norm_label(text)
    return float(text)


def read_table_csv(path: str | Path) -> CsvTable:
    """Parse a CSV written by this package, keeping its ``#`` metadata.

    Raises:
        `FileSystemError`: If the file is missing or unreadable.

    """
    table_path = validate_file_path(path)
    try:
        text = table_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileSystemError(
            f"Cannot read table: {exc}", path=table_path, operation="read"
        ) from exc

    metadata: dict[str, str] = {}
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            metadata[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise FileSystemError(
            f"Table has no header line: {table_path}", path=table_path
        )
    records = list(csv.reader(body))
    columns = tuple(records[0])
    rows = tuple(
        tuple(_parse_cell(cell, name) for cell, name in zip(record, columns))
        for record in records[1:]
    )
    return CsvTable(metadata=metadata, columns=columns, rows=rows)


def read_weight_table(
    path: str | Path,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Return the ``x`` and ``cdf`` columns of a two-column weight file.

    A header line is optional; ``#`` lines are skipped.

    Raises:
        `FileSystemError`: If the file is unreadable or not two numeric columns.

    """
    weight_path = validate_file_path(path)
    try:
        text = weight_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileSystemError(
            f"Cannot read weight file: {exc}", path=weight_path, operation="read"
        ) from exc

    xs: list[float] = []
    levels: list[float] = []
    lines = [line for line in text.splitlines() if line.strip()]
    for number, record in enumerate(csv.reader(lines), start=1):
        if record[0].lstrip().startswith("#"):
            continue
        if len(record) != 2:  # noqa: PLR2004
            raise FileSystemError(
                f"Weight file line {number} needs two columns x,cdf",
                path=weight_path,
                operation="read",
            )
        try:
            x, level = float(record[0]), float(record[1])
        except ValueError as exc:
            if not xs:
                continue  # header
            raise FileSystemError(
                f"Weight file line {number} is not numeric",
                path=weight_path,
                operation="read",
            ) from exc
        xs.append(x)
        levels.append(level)
    return tuple(xs), tuple(levels)


class FileSystem(Protocol):
    """Minimal filesystem abstraction used by experiment runs."""

    def ensure_dir(self, path: Path) -> None:  # pragma: no cover - protocol
        """Create the provided directory (idempotent)."""
        ...

    def write_text(self, path: Path, text: str) -> None:  # pragma: no cover
        """Replace ``path`` with ``text`` atomically."""
        ...


class LocalFileSystem:
    """FileSystem implementation backed by pathlib and atomic renames."""

    def ensure_dir(self, path: Path) -> None:
        """Create the directory if it does not already exist."""
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise FileSystemError(
                f"Cannot create output directory: {exc}",
                path=path,
                operation="mkdir",
            ) from exc

    def write_text(self, path: Path, text: str) -> None:
        """Write to a temporary sibling, then rename it over ``path``."""
        temp_name: str | None = None
        try:
            with tempfile.NamedTemporaryFile(
                "w",
                encoding="utf-8",
                newline="",
                dir=path.parent,
                prefix=f".{path.name}.",
                delete=False,
            ) as handle:
                temp_name = handle.name
                handle.write(text)
            os.replace(temp_name, path)
        except OSError as exc:
            if temp_name is not None and os.path.exists(temp_name):
                os.unlink(temp_name)
            raise FileSystemError(
                f"Cannot write output file: {exc}", path=path, operation="write"
            ) from exc


class Reporter(Protocol):
    """Reporting hooks for run progress."""

    def starting(self, command: str, output_dir: Path) -> None:  # pragma: no cover
        """Report the beginning of a run."""
        ...

    def wrote(self, path: Path, rows: int) -> None:  # pragma: no cover
        """Report one written file."""
        ...

    def notice(self, message: str) -> None:  # pragma: no cover
        """Report a skipped or degraded part of the run."""
        ...

    def finished(self, result: RunResult) -> None:  # pragma: no cover
        """Report the end of a run."""
        ...


class PrintReporter:
    """Default Reporter that prints to stdout/stderr."""

    def __init__(
        self, stdout: TextIO | None = None, stderr: TextIO | None = None
    ) -> None:
        """Create a printer-based reporter with optional stream overrides."""
        self._stdout: TextIO = stdout if stdout is not None else sys.stdout
        self._stderr: TextIO = stderr if stderr is not None else sys.stderr

    def starting(self, command: str, output_dir: Path) -> None:
        print(f"-- Running {command} into {output_dir} --", file=self._stdout)

    def wrote(self, path: Path, rows: int) -> None:
        print(f"Wrote: {path} ({rows} rows)", file=self._stdout)

    def notice(self, message: str) -> None:
        print(f"Note: {message}", file=self._stderr)

    def finished(self, result: RunResult) -> None:
        print(f"Done: {result}", file=self._stdout)


@dataclass(frozen=True)
class ExperimentDeps:
    """Container for dependencies used when running experiments."""

    reporter: Reporter = field(default_factory=PrintReporter)
    filesystem: FileSystem = field(default_factory=LocalFileSystem)


class ExperimentRunner:
    """Shell orchestration that turns an `ExperimentPlan` into files."""

    def __init__(self, deps: ExperimentDeps | None = None) -> None:
        """Create a runner with dependency injection for testing."""
        self.deps = deps or ExperimentDeps()

    def run(self, plan: ExperimentPlan, config: ExperimentConfig) -> RunResult:
        """Execute every task of ``plan`` and return the written files."""
        out = Path(config.out)
        reporter = self.deps.reporter
        reporter.starting(plan.command.value, out)
        self.deps.filesystem.ensure_dir(out)
        for message in plan.notices:
            logger.warning("%s", message)
            reporter.notice(message)

        result = RunResult(command=plan.command.value, output_dir=out)
        snapshot = out / CONFIG_SNAPSHOT_NAME
        self.deps.filesystem.write_text(
            snapshot, safe_dump(config.to_mapping(), default_flow_style=False)
        )
        result.files.append(snapshot)

        metadata = self._metadata(plan, config)
        reports: dict[bool, tuple[ErrorReport, ErrorReport]] = {}
        weight = self._weight_choice(config)
        for task in plan.tasks:
            if task.kind is TaskKind.CURVES:
                columns, rows = self._curves(task, config, weight)
            elif task.kind is TaskKind.ERROR_TABLE:
                if task.weighted not in reports:
                    reports[task.weighted] = self._reports(
                        config, weight if task.weighted else None
                    )
                cdf_report, q_report = reports[task.weighted]
                report = cdf_report if task.domain is CurveDomain.CDF else q_report
                columns, rows = self._report_rows(report)
            else:
                columns, rows = self._coupling_rows(task, config)
            path = out / task.filename
            self.deps.filesystem.write_text(path, render_csv(columns, rows, metadata))
            logger.info("Wrote %s (%d rows)", path, len(rows))
            reporter.wrote(path, len(rows))
            result.files.append(path)

        reporter.finished(result)
        return result

    @staticmethod
    def _metadata(plan: ExperimentPlan, config: ExperimentConfig) -> dict[str, str]:
        return {
            "command": plan.command.value,
            "config_sha256": config.digest(),
            "population": config.population.label,
            "mesh": str(config.mesh),
            "draws": str(config.draws),
            "seed": str(config.seed),
        }

    @staticmethod
    def _weight_choice(config: ExperimentConfig) -> WeightChoice:
        table = None
        if config.weight is WeightKind.FILE and config.weight_file is not None:
            table = read_weight_table(config.weight_file)
        return WeightChoice(
            kind=config.weight, table=table, iterations=config.iterations
        )

    @staticmethod
    def _interval(config: ExperimentConfig, domain: CurveDomain) -> EvalInterval:
        if domain is CurveDomain.CDF:
            return EvalInterval.distribution(*config.cdf_interval)
        return EvalInterval.quantile(*config.q_interval)

    def _curves(
        self, task: ExperimentTask, config: ExperimentConfig, weight: WeightChoice
    ) -> tuple[tuple[str, ...], list[list[CellValue]]]:
        assert task.domain is not None and task.sample_size is not None
        table = curve_table(
            config.model(task.sample_size),
            self._interval(config, task.domain),
            config.mesh,
            orders=config.orders,
            weight=weight,
            draws=config.draws,
            seed=config.seed,
        )
        top = table.approximations[table.expansion_order]
        logger.info(
            "%s n=%d: %d decreasing pairs before rearrangement, monotone after: %s",
            task.domain.value,
            task.sample_size,
            decreasing_pairs(top.values),
            is_nondecreasing(table.rearranged.values),
        )
        rows: list[list[CellValue]] = [
            list(cells) for cells in zip(*table.column_values())
        ]
        return table.columns, rows

    @staticmethod
    def _reports(
        config: ExperimentConfig, weight: WeightChoice | None
    ) -> tuple[ErrorReport, ErrorReport]:
        return improvement_report(
            config.model(config.sample_sizes[0]),
            EvalInterval.distribution(*config.cdf_interval),
            EvalInterval.quantile(*config.q_interval),
            config.mesh,
            sample_sizes=config.sample_sizes,
            orders=config.orders,
            weight=weight,
        )

    @staticmethod
    def _report_rows(
        report: ErrorReport,
    ) -> tuple[tuple[str, ...], list[list[CellValue]]]:
        rows: list[list[CellValue]] = [
            [
                row.sample_size,
                norm_label(row.norm),
                row.baseline,
                row.expansion,
                row.rearranged,
                row.ratio,
            ]
            for row in report
        ]
        return report.columns, rows

    @staticmethod
    def _coupling_rows(
        task: ExperimentTask, config: ExperimentConfig
    ) -> tuple[tuple[str, ...], list[list[CellValue]]]:
        window = EvalInterval.quantile(*config.q_interval)
        results: list[CouplingRow] = []
        model: SampleMeanModel | None = None
        sample = None
        for n, order, p in task.cells:
            if model is None or model.sample_size != n:
                model = config.model(n)
                sample = coupling_sample(model, config.draws, config.seed)
            spec = ExpansionSpec(model.cumulants, n, order)
            outcome = coupling_mc(
                model,
                spec,
                p,
                config.draws,
                config.seed,
                interval=window,
                mesh=config.mesh,
                sample=sample,
            )
            results.append(CouplingRow(n, order, p, outcome))
        rows: list[list[CellValue]] = [
            [
                row.sample_size,
                row.order,
                norm_label(row.norm),
                row.result.raw_moment,
                row.result.rearranged_moment,
                row.result.std_error,
            ]
            for row in results
        ]
        return COUPLING_COLUMNS, rows


__all__ = [
    "COUPLING_COLUMNS",
    "CsvTable",
    "ExperimentDeps",
    "ExperimentRunner",
    "LocalFileSystem",
    "PrintReporter",
    "format_value",
    "read_table_csv",
    "read_weight_table",
    "render_csv",
]
