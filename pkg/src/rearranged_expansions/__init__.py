"""Define the rearranged-expansions public API.

Symbols listed in ``rearranged_expansions.__all__`` are the stable surface.
High-level categories include:

* **Oracles** - `true_cdf`, `true_quantile` and `mc_cdf` for the standardized
  sample mean of a `GammaPopulation` or `LogNormalPopulation`.
* **Expansions** - `edgeworth_cdf` and `cornish_fisher_quantile` driven by an
  `ExpansionSpec`.
* **Rearrangement** - `rearrange`, `weighted_rearrange` and the weight
  factories operating on a `GridFunction`.
* **Metrics** - `lp_error`, `improvement_report` and `coupling_mc`.
* **Configuration & runs** - `ExperimentConfig` and `ExperimentRunner` behind
  the ``rearranged-expansions`` command.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .config import ExperimentConfig
from .constants import CurveDomain, PopulationFamily, WeightKind
from .core.distributions import (
    Cumulants,
    GammaPopulation,
    LogNormalPopulation,
    SampleMeanModel,
    mc_cdf,
    true_cdf,
    true_quantile,
)
from .core.expansions import ExpansionSpec, cornish_fisher_quantile, edgeworth_cdf
from .core.metrics import (
    EvalInterval,
    coupling_mc,
    improvement_report,
    lp_error,
    weighted_lp_error,
)
from .core.rearrangement import (
    GridFunction,
    WeightCdf,
    normal_weight,
    rearrange,
    uniform_weight,
    weighted_rearrange,
)
from .exceptions import (
    ConfigurationError,
    ContractError,
    DomainError,
    FileSystemError,
    RearrangementError,
    UnsupportedOracleError,
)
from .result import CouplingResult, CurveTable, ErrorReport, ErrorRow, RunResult
from .shell.experiments import ExperimentRunner

__all__ = [
    "__version__",
    # Configuration
    "ExperimentConfig",
    "CurveDomain",
    "PopulationFamily",
    "WeightKind",
    # Oracles
    "Cumulants",
    "GammaPopulation",
    "LogNormalPopulation",
    "SampleMeanModel",
    "mc_cdf",
    "true_cdf",
    "true_quantile",
    # Expansions
    "ExpansionSpec",
    "cornish_fisher_quantile",
    "edgeworth_cdf",
    # Rearrangement
    "GridFunction",
    "WeightCdf",
    "normal_weight",
    "rearrange",
    "uniform_weight",
    "weighted_rearrange",
    # Metrics
    "EvalInterval",
    "coupling_mc",
    "improvement_report",
    "lp_error",
    "weighted_lp_error",
    # Results
    "CouplingResult",
    "CurveTable",
    "ErrorReport",
    "ErrorRow",
    "RunResult",
    "ExperimentRunner",
    # Exceptions
    "RearrangementError",
    "ConfigurationError",
    "ContractError",
    "DomainError",
    "FileSystemError",
    "UnsupportedOracleError",
]
