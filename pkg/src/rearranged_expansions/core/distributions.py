"""Provide population models and truth oracles for standardized sample means.

The statistic throughout is the standardized mean

    Z_n = (Y_1 + ... + Y_n - n E[Y]) / (sqrt(n) sd(Y)),

whose limit is standard normal. For a Gamma(k, theta) population the sum is
Gamma(n k, theta), so with ``a = n k`` the distribution function is
``F_n(x) = P(a, a + x sqrt(a))`` and the scale drops out entirely.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..constants import MIN_COUPLING_DRAWS, PopulationFamily
from ..exceptions import DomainError, UnsupportedOracleError
from .random import ShiftRegisterGenerator
from .special_functions import (
    FloatOrArray,
    inverse_regularized_gamma_p,
    regularized_gamma_p,
)

logger = logging.getLogger(__name__)

SIMULATION_CHUNK = 1 << 17
_FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class Cumulants:
    """Define the skewness and excess kurtosis of a population."""

    skewness: float
    excess_kurtosis: float

    def __post_init__(self) -> None:
        """Reject non-finite or infeasible cumulant pairs."""
        if not (math.isfinite(self.skewness) and math.isfinite(self.excess_kurtosis)):
            raise DomainError(
                "Cumulants must be finite",
                parameter="cumulants",
                value=(self.skewness, self.excess_kurtosis),
            )
        if self.excess_kurtosis < self.skewness**2 - 2.0 - _FEASIBILITY_SLACK:
            raise DomainError(
                "Excess kurtosis must be at least skewness^2 - 2",
                parameter="excess_kurtosis",
                value=self.excess_kurtosis,
            )


def gamma_cumulants(shape: float) -> Cumulants:
    """Return the Gamma family's cumulants, ``(2/sqrt(k), 6/k)``."""
    if not (math.isfinite(shape) and shape > 0):
        raise DomainError(
            "Gamma shape must be positive", parameter="shape", value=shape
        )
    return Cumulants(skewness=2.0 / math.sqrt(shape), excess_kurtosis=6.0 / shape)


def lognormal_cumulants(mu: float, sigma: float) -> Cumulants:
    """Return the lognormal family's cumulants; ``mu`` does not enter."""
    if not math.isfinite(mu):
        raise DomainError("Lognormal mu must be finite", parameter="mu", value=mu)
    if not (math.isfinite(sigma) and sigma > 0):
        raise DomainError(
            "Lognormal sigma must be positive", parameter="sigma", value=sigma
        )
    s2 = sigma * sigma
    w = math.exp(s2)
    skewness = (w + 2.0) * math.sqrt(math.expm1(s2))
    excess = math.exp(4 * s2) + 2 * math.exp(3 * s2) + 3 * math.exp(2 * s2) - 6.0
    return Cumulants(skewness=skewness, excess_kurtosis=excess)


@dataclass(frozen=True)
class GammaPopulation:
    """Define a Gamma(shape, scale) population."""

    shape: float
    scale: float

    def __post_init__(self) -> None:
        """Validate parameters."""
        if not (math.isfinite(self.shape) and self.shape > 0):
            raise DomainError(
                "Gamma shape must be positive", parameter="shape", value=self.shape
            )
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise DomainError(
                "Gamma scale must be positive", parameter="scale", value=self.scale
            )

    family = PopulationFamily.GAMMA

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def std(self) -> float:
        return math.sqrt(self.shape) * self.scale

    @property
    def cumulants(self) -> Cumulants:
        return gamma_cumulants(self.shape)

    @property
    def label(self) -> str:
        return f"gamma:{self.shape:g}:{self.scale:g}"


@dataclass(frozen=True)
class LogNormalPopulation:
    """Define a LogNormal(mu, sigma) population (log-scale parameters)."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        """Validate parameters."""
        lognormal_cumulants(self.mu, self.sigma)

    family = PopulationFamily.LOGNORMAL

    @property
    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    @property
    def std(self) -> float:
        s2 = self.sigma**2
        return math.sqrt(math.expm1(s2)) * math.exp(self.mu + 0.5 * s2)

    @property
    def cumulants(self) -> Cumulants:
        return lognormal_cumulants(self.mu, self.sigma)

    @property
    def label(self) -> str:
        return f"lognormal:{self.mu:g}:{self.sigma:g}"


Population = Union[GammaPopulation, LogNormalPopulation]


@dataclass(frozen=True)
class SampleMeanModel:
    """Define the standardized mean of ``sample_size`` draws from a population."""

    population: Population
    sample_size: int

    def __post_init__(self) -> None:
        """Validate the sample size."""
        size = self.sample_size
        if isinstance(size, bool) or int(size) != size:
            raise DomainError(
                "sample_size must be an integer",
                parameter="sample_size",
                value=self.sample_size,
            )
        if self.sample_size < 1:
            raise DomainError(
                "sample_size must be at least 1",
                parameter="sample_size",
                value=self.sample_size,
            )

    @property
    def family(self) -> PopulationFamily:
        return self.population.family

    @property
    def cumulants(self) -> Cumulants:
        return self.population.cumulants

    def with_sample_size(self, sample_size: int) -> SampleMeanModel:
        """Return a copy of the model for another sample size."""
        return replace(self, sample_size=sample_size)

    def _gamma_sum_shape(self, oracle: str) -> float:
        if not isinstance(self.population, GammaPopulation):
            raise UnsupportedOracleError(
                f"No closed-form {oracle} for a {self.family.value} sample mean; "
                "use the Monte Carlo oracle mc_cdf instead",
                oracle=oracle,
                population=self.population.label,
            )
        return self.sample_size * self.population.shape


def true_cdf(model: SampleMeanModel, x: ArrayLike) -> FloatOrArray:
    """Return the exact distribution function F_n of the standardized mean.

    Raises:
        `UnsupportedOracleError`: For lognormal populations.
        `DomainError`: If ``x`` is not finite.

    """
    a = model._gamma_sum_shape("distribution function")
    values = np.asarray(x, dtype=np.float64)
    if not np.isfinite(values).all():
        raise DomainError("x must be finite", parameter="x", value=x)
    root = math.sqrt(a)
    gamma_arg = np.maximum(a + values * root, 0.0)
    result = np.asarray(regularized_gamma_p(a, gamma_arg), dtype=np.float64)
    if values.ndim == 0:
        return float(result)
    return result


def true_quantile(model: SampleMeanModel, u: ArrayLike) -> FloatOrArray:
    """Return the exact quantile function Q_n of the standardized mean.

    Raises:
        `UnsupportedOracleError`: For lognormal populations.
        `DomainError`: If ``u`` is not strictly inside (0, 1).

    """
    a = model._gamma_sum_shape("quantile function")
    gamma_quantile = inverse_regularized_gamma_p(a, u)
    result = (np.asarray(gamma_quantile, dtype=np.float64) - a) / math.sqrt(a)
    if result.ndim == 0:
        return float(result)
    return result


def simulate_standardized_means(
    model: SampleMeanModel,
    draws: int,
    seed: int,
    *,
    chunk_size: int = SIMULATION_CHUNK,
) -> NDArray[np.float64]:
    """Return ``draws`` simulated values of the standardized mean.

    Gamma samples are drawn through the law of their sum, one uniform per
    sample. Lognormal samples use ``sample_size`` uniforms each, consumed in
    stream order. The chunk size does not change the result.
    """
    if isinstance(draws, bool) or int(draws) != draws or draws < 1:
        raise DomainError(
            "draws must be a positive integer", parameter="draws", value=draws
        )
    if chunk_size < 1:
        raise DomainError(
            "chunk_size must be positive", parameter="chunk_size", value=chunk_size
        )
    generator = ShiftRegisterGenerator(seed)
    out = np.empty(int(draws), dtype=np.float64)
    population = model.population
    n = model.sample_size
    for start in range(0, int(draws), chunk_size):
        stop = min(start + chunk_size, int(draws))
        count = stop - start
        if isinstance(population, GammaPopulation):
            out[start:stop] = true_quantile(model, generator.uniforms(count))
        else:
            normals = generator.normals(count * n).reshape(count, n)
            observations = np.exp(population.mu + population.sigma * normals)
            totals = observations.sum(axis=1)
            out[start:stop] = (totals - n * population.mean) / (
                math.sqrt(n) * population.std
            )
    logger.debug(
        "Simulated %d standardized means for %s, n=%d", draws, population.label, n
    )
    return out


def mc_cdf(
    model: SampleMeanModel,
    grid: Sequence[float] | NDArray[np.float64],
    draws: int,
    seed: int,
) -> NDArray[np.float64]:
    """Return the empirical distribution function of simulated means on ``grid``.

    Raises:
        `DomainError`: If the grid is empty or not ascending, or ``draws < 1``.

    """
    points = np.asarray(grid, dtype=np.float64)
    if points.ndim != 1 or points.size == 0:
        raise DomainError("grid must be a non-empty list", parameter="grid", value=grid)
    if np.any(np.diff(points) < 0):
        raise DomainError("grid must be sorted ascending", parameter="grid")
    if draws < MIN_COUPLING_DRAWS:
        logger.warning(
            "mc_cdf with %d draws: pointwise standard error up to %.2g",
            draws,
            0.5 / math.sqrt(max(draws, 1)),
        )
    simulated = np.sort(simulate_standardized_means(model, draws, seed))
    counts = np.searchsorted(simulated, points, side="right")
    return counts / float(draws)


__all__ = [
    "Cumulants",
    "GammaPopulation",
    "LogNormalPopulation",
    "Population",
    "SampleMeanModel",
    "gamma_cumulants",
    "lognormal_cumulants",
    "mc_cdf",
    "simulate_standardized_means",
    "true_cdf",
    "true_quantile",
]
