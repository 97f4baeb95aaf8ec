"""Pytest configuration and fixtures for rearranged-expansions tests."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import pytest

from rearranged_expansions.config import ExperimentConfig
from rearranged_expansions.core.distributions import (
    Cumulants,
    GammaPopulation,
    SampleMeanModel,
)
from rearranged_expansions.shell.experiments import ExperimentDeps, PrintReporter

from .bdd import Scenario
from .bdd import scenario as make_scenario


@pytest.fixture
def story(request: pytest.FixtureRequest) -> Scenario:
    """Provide a Scenario helper tied to the current test node."""
    return make_scenario(request.node.nodeid)


@pytest.fixture
def gamma_population() -> GammaPopulation:
    """Gamma(1/16, 16), the skewed population of the reference tables."""
    return GammaPopulation(shape=0.0625, scale=16.0)


@pytest.fixture
def gamma_model(gamma_population: GammaPopulation) -> SampleMeanModel:
    """Standardized mean of four Gamma(1/16, 16) observations."""
    return SampleMeanModel(gamma_population, 4)


@pytest.fixture
def normal_cumulants() -> Cumulants:
    """Zero skewness and excess kurtosis: every expansion is exactly normal."""
    return Cumulants(skewness=0.0, excess_kurtosis=0.0)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for random test instances."""
    return np.random.default_rng(20070801)


@pytest.fixture
def small_config(tmp_path: Path) -> ExperimentConfig:
    """Fast configuration writing into a temporary directory."""
    return ExperimentConfig.from_mapping(
        {
            "n": "4,8",
            "mesh": 201,
            "draws": 20_000,
            "seed": 7,
            "out": str(tmp_path / "results"),
        }
    )


@pytest.fixture
def quiet_deps() -> ExperimentDeps:
    """Runner dependencies printing into in-memory streams."""
    return ExperimentDeps(reporter=PrintReporter(io.StringIO(), io.StringIO()))
