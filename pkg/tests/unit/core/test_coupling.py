from __future__ import annotations

import pytest

from rearranged_expansions.core.distributions import (
    Cumulants,
    LogNormalPopulation,
    SampleMeanModel,
)
from rearranged_expansions.core.expansions import ExpansionSpec
from rearranged_expansions.core.metrics import (
    EvalInterval,
    coupling_mc,
    coupling_sample,
)
from rearranged_expansions.exceptions import (
    ContractError,
    DomainError,
    UnsupportedOracleError,
)
from tests.bdd import Scenario

pytestmark = pytest.mark.unit

DRAWS = 10_000
SEED = 11


def _spec(model: SampleMeanModel, order: int = 3) -> ExpansionSpec:
    return ExpansionSpec(model.cumulants, model.sample_size, order)


class TestCouplingSample:
    def test_levels_lie_in_unit_interval(self, gamma_model: SampleMeanModel) -> None:
        sample = coupling_sample(gamma_model, DRAWS, SEED)
        assert len(sample) == DRAWS
        assert float(sample.levels.min()) >= 0.0
        assert float(sample.levels.max()) <= 1.0

    def test_lognormal_is_unsupported(self) -> None:
        model = SampleMeanModel(LogNormalPopulation(0.0, 1.0), 5)
        with pytest.raises(UnsupportedOracleError):
            coupling_sample(model, DRAWS, SEED)


class TestCouplingMonteCarlo:
    def test_deterministic_for_a_seed(self, gamma_model: SampleMeanModel) -> None:
        spec = _spec(gamma_model)
        first = coupling_mc(gamma_model, spec, 2.0, DRAWS, SEED, mesh=201)
        second = coupling_mc(gamma_model, spec, 2.0, DRAWS, SEED, mesh=201)
        assert first == second

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_rearranged_coupling_is_not_worse(
        self, story: Scenario, gamma_model: SampleMeanModel, p: float
    ) -> None:
        story.given("the third-order Cornish-Fisher quantile at n = 4")
        result = coupling_mc(gamma_model, _spec(gamma_model), p, DRAWS, SEED, mesh=401)
        story.then("the rearranged moment stays within two standard errors of the raw")
        assert result.improved
        assert result.rearranged_moment < result.raw_moment
        assert 0.95 < result.kept_fraction <= 1.0

    def test_shared_sample_gives_same_answer(
        self, gamma_model: SampleMeanModel
    ) -> None:
        sample = coupling_sample(gamma_model, DRAWS, SEED)
        shared = coupling_mc(
            gamma_model, _spec(gamma_model), 1.0, DRAWS, SEED, mesh=201, sample=sample
        )
        fresh = coupling_mc(gamma_model, _spec(gamma_model), 1.0, DRAWS, SEED, mesh=201)
        assert shared == fresh

    def test_zero_cumulants_leave_nothing_to_rearrange(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        spec = ExpansionSpec(Cumulants(0.0, 0.0), gamma_model.sample_size, 3)
        result = coupling_mc(gamma_model, spec, 2.0, DRAWS, SEED, mesh=1001)
        story.then("raw and rearranged moments agree up to interpolation")
        story.expect_close(result.rearranged_moment, result.raw_moment, rel_tol=1e-3)

    def test_narrow_interval_keeps_fewer_draws(
        self, gamma_model: SampleMeanModel
    ) -> None:
        result = coupling_mc(
            gamma_model,
            _spec(gamma_model),
            2.0,
            DRAWS,
            SEED,
            interval=EvalInterval.quantile(0.25, 0.75),
            mesh=201,
        )
        assert 0.4 < result.kept_fraction < 0.6

    def test_unsupported_norm(self, gamma_model: SampleMeanModel) -> None:
        with pytest.raises(DomainError):
            coupling_mc(gamma_model, _spec(gamma_model), 3.0, DRAWS, SEED)

    def test_too_few_draws(self, gamma_model: SampleMeanModel) -> None:
        with pytest.raises(DomainError):
            coupling_mc(gamma_model, _spec(gamma_model), 2.0, DRAWS - 1, SEED)

    def test_sample_must_match_draws(self, gamma_model: SampleMeanModel) -> None:
        sample = coupling_sample(gamma_model, DRAWS, SEED)
        with pytest.raises(ContractError):
            coupling_mc(
                gamma_model, _spec(gamma_model), 2.0, 2 * DRAWS, SEED, sample=sample
            )

    def test_lognormal_is_unsupported(self) -> None:
        model = SampleMeanModel(LogNormalPopulation(0.0, 1.0), 5)
        spec = ExpansionSpec(model.cumulants, 5, 3)
        with pytest.raises(UnsupportedOracleError):
            coupling_mc(model, spec, 2.0, DRAWS, SEED)
