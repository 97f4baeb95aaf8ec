"""Provide pure planning of experiment runs for the CLI shell."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..config import ExperimentConfig
from ..constants import (
    CDF_TABLE_NAME,
    CDF_WEIGHTED_TABLE_NAME,
    COUPLING_NORMS,
    COUPLING_TABLE_NAME,
    MIN_COUPLING_DRAWS,
    QUANTILE_TABLE_NAME,
    QUANTILE_WEIGHTED_TABLE_NAME,
    CurveDomain,
    PopulationFamily,
    Subcommand,
    WeightKind,
)
from ..exceptions import ConfigurationError, UnsupportedOracleError


class TaskKind(str, Enum):
    """Define the kinds of work a plan contains."""

    CURVES = "curves"
    ERROR_TABLE = "error_table"
    COUPLING = "coupling"


@dataclass(frozen=True)
class ExperimentTask:
    """Define one output file and what goes into it."""

    kind: TaskKind
    filename: str
    domain: CurveDomain | None = None
    sample_size: int | None = None
    weighted: bool = False
    cells: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class ExperimentPlan:
    """Define the deterministic task list for one subcommand."""

    command: Subcommand
    tasks: tuple[ExperimentTask, ...]
    notices: tuple[str, ...] = field(default=())

    def filenames(self) -> list[str]:
        return [task.filename for task in self.tasks]


def curves_filename(domain: CurveDomain, sample_size: int) -> str:
    """Return the file name of one curve table."""
    return f"curves_{domain.value}_n{sample_size}.csv"


def _require_closed_form(config: ExperimentConfig, command: Subcommand) -> None:
    if config.population.family is not PopulationFamily.GAMMA:
        raise UnsupportedOracleError(
            f"'{command.value}' needs the closed-form distribution function, which "
            f"a {config.population.family.value} sample mean does not have",
            oracle="true_cdf",
            population=config.population.label,
        )


def build_experiment_plan(
    command: Subcommand | str, config: ExperimentConfig
) -> ExperimentPlan:
    """Return the tasks needed to satisfy ``command`` under ``config``.

    Raises:
        `UnsupportedOracleError`: If tables or coupling are requested for a
            population without closed-form truth.
        `ConfigurationError`: If coupling is requested with too few draws.

    """
    command = Subcommand(command)
    if command is Subcommand.CURVES:
        return _plan_curves(config)
    _require_closed_form(config, command)
    if command is Subcommand.TABLE:
        return _plan_table(config)
    return _plan_coupling(config)


def _plan_curves(config: ExperimentConfig) -> ExperimentPlan:
    tasks: list[ExperimentTask] = []
    notices: list[str] = []
    closed_form = config.population.family is PopulationFamily.GAMMA
    for n in config.sample_sizes:
        tasks.append(
            ExperimentTask(
                TaskKind.CURVES,
                curves_filename(CurveDomain.CDF, n),
                domain=CurveDomain.CDF,
                sample_size=n,
            )
        )
        if closed_form:
            tasks.append(
                ExperimentTask(
                    TaskKind.CURVES,
                    curves_filename(CurveDomain.QUANTILE, n),
                    domain=CurveDomain.QUANTILE,
                    sample_size=n,
                )
            )
    if not closed_form:
        notices.append(
            f"Skipping quantile curves: no quantile oracle for "
            f"{config.population.label}; distribution curves use Monte Carlo truth "
            f"({config.draws} draws, seed {config.seed})"
        )
    return ExperimentPlan(Subcommand.CURVES, tuple(tasks), tuple(notices))


def _plan_table(config: ExperimentConfig) -> ExperimentPlan:
    tasks = [
        ExperimentTask(TaskKind.ERROR_TABLE, CDF_TABLE_NAME, domain=CurveDomain.CDF),
        ExperimentTask(
            TaskKind.ERROR_TABLE, QUANTILE_TABLE_NAME, domain=CurveDomain.QUANTILE
        ),
    ]
    if config.weight is not WeightKind.NONE:
        tasks.extend(
            [
                ExperimentTask(
                    TaskKind.ERROR_TABLE,
                    CDF_WEIGHTED_TABLE_NAME,
                    domain=CurveDomain.CDF,
                    weighted=True,
                ),
                ExperimentTask(
                    TaskKind.ERROR_TABLE,
                    QUANTILE_WEIGHTED_TABLE_NAME,
                    domain=CurveDomain.QUANTILE,
                    weighted=True,
                ),
            ]
        )
    return ExperimentPlan(Subcommand.TABLE, tuple(tasks))


def _plan_coupling(config: ExperimentConfig) -> ExperimentPlan:
    if config.draws < MIN_COUPLING_DRAWS:
        raise ConfigurationError(
            f"coupling needs at least {MIN_COUPLING_DRAWS} draws",
            config_key="draws",
            config_value=config.draws,
        )
    cells = tuple(
        (n, order, p)
        for n in config.sample_sizes
        for order in config.orders
        for p in COUPLING_NORMS
    )
    task = ExperimentTask(TaskKind.COUPLING, COUPLING_TABLE_NAME, cells=cells)
    return ExperimentPlan(Subcommand.COUPLING, (task,))


__all__ = [
    "ExperimentPlan",
    "ExperimentTask",
    "TaskKind",
    "build_experiment_plan",
    "curves_filename",
]
