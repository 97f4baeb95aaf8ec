"""Shell layer for experiment runs - orchestrates I/O around the pure core."""

from .experiments import (
    CsvTable,
    ExperimentDeps,
    ExperimentRunner,
    LocalFileSystem,
    PrintReporter,
    read_table_csv,
    read_weight_table,
)

__all__ = [
    "ExperimentRunner",
    "ExperimentDeps",
    "LocalFileSystem",
    "PrintReporter",
    "CsvTable",
    "read_table_csv",
    "read_weight_table",
]
