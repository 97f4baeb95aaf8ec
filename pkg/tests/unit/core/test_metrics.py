from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from rearranged_expansions.constants import CurveDomain, WeightKind
from rearranged_expansions.core.distributions import Cumulants, SampleMeanModel
from rearranged_expansions.core.expansions import ExpansionSpec
from rearranged_expansions.core.metrics import (
    EvalInterval,
    WeightChoice,
    build_weight,
    curve_table,
    expansion_curve,
    improvement_report,
    lp_error,
    restrict_table,
    truth_curve,
    weighted_lp_error,
    weighted_rearranged_error,
)
from rearranged_expansions.core.rearrangement import (
    GridFunction,
    rearrange,
    uniform_weight,
)
from rearranged_expansions.exceptions import ContractError, DomainError
from rearranged_expansions.result import ErrorReport
from tests.bdd import Scenario

pytestmark = pytest.mark.unit

CDF_INTERVAL = EvalInterval.distribution(-3.0, 3.0)
Q_INTERVAL = EvalInterval.quantile(0.005, 0.995)


class TestLpError:
    def test_constant_offset(self, story: Scenario) -> None:
        story.given("grids differing by a constant 0.25 on an interval of length 2")
        f0 = GridFunction.from_function(np.sin, -1.0, 1.0, 101)
        fhat = f0.with_values(f0.values + 0.25)
        story.then("every finite norm equals 0.25 * 2^(1/p)")
        for p in (1.0, 2.0, 3.0, 4.0):
            expected = 0.25 * 2.0 ** (1.0 / p)
            story.expect_close(lp_error(fhat, f0, p), expected, rel_tol=1e-12)
        story.expect_close(lp_error(fhat, f0, math.inf), 0.25, rel_tol=1e-12)

    def test_identity_against_zero(self, story: Scenario) -> None:
        line = GridFunction.from_function(lambda x: x, 0.0, 1.0, 1001)
        zero = line.with_values(np.zeros(1001))
        root_third = 1.0 / math.sqrt(3.0)
        story.expect_close(lp_error(line, zero, 2.0), root_third, abs_tol=1e-6)
        story.expect_close(lp_error(line, zero, 1.0), 0.5, abs_tol=1e-12)

    def test_identical_grids_have_zero_error(self) -> None:
        f = GridFunction(0.0, 1.0, [1.0, 2.0, 3.0])
        assert lp_error(f, f, 2.0) == 0.0

    def test_large_exponent_does_not_overflow(self) -> None:
        f0 = GridFunction(0.0, 1.0, np.zeros(10))
        fhat = f0.with_values(np.full(10, 1e3))
        assert lp_error(fhat, f0, 200.0) == pytest.approx(1e3)

    def test_mesh_mismatch_and_bad_norm(self) -> None:
        f = GridFunction(0.0, 1.0, [1.0, 2.0])
        with pytest.raises(ContractError):
            lp_error(f, GridFunction(0.0, 1.0, [1.0, 2.0, 3.0]), 2.0)
        with pytest.raises(ContractError):
            lp_error(f, GridFunction(0.0, 2.0, [1.0, 2.0]), 2.0)
        with pytest.raises(DomainError):
            lp_error(f, f, 0.5)


class TestWeightedErrors:
    def test_uniform_weight_matches_plain_error(
        self, story: Scenario, rng: np.random.Generator
    ) -> None:
        f0 = GridFunction(0.0, 1.0, np.sort(rng.normal(size=101)))
        fhat = f0.with_values(rng.normal(size=101))
        w = uniform_weight(0.0, 1.0)
        for p in (1.0, 2.0, math.inf):
            story.expect_close(
                weighted_lp_error(fhat, f0, w, p), lp_error(fhat, f0, p), abs_tol=1e-12
            )

    @pytest.mark.parametrize(("lower", "upper"), [(-3.0, 3.0), (0.005, 0.995)])
    def test_uniform_weight_matches_plain_error_on_any_interval(
        self,
        story: Scenario,
        rng: np.random.Generator,
        lower: float,
        upper: float,
    ) -> None:
        story.given(f"a noisy estimate on [{lower}, {upper}]")
        f0 = GridFunction(lower, upper, np.sort(rng.normal(size=201)))
        fhat = f0.with_values(f0.values + rng.normal(scale=0.3, size=201))
        w = uniform_weight(lower, upper)

        story.then("weighted and plain errors agree, before and after rearranging")
        for p in (1.0, 2.0, 3.0, 4.0, math.inf):
            story.expect_close(
                weighted_lp_error(fhat, f0, w, p),
                lp_error(fhat, f0, p),
                abs_tol=1e-12,
                rel_tol=0.0,
            )
            story.expect_close(
                weighted_rearranged_error(fhat, f0, w, p),
                lp_error(rearrange(fhat), f0, p),
                abs_tol=1e-12,
                rel_tol=0.0,
            )

    def test_weighted_rearrangement_never_hurts(
        self, story: Scenario, rng: np.random.Generator
    ) -> None:
        story.given("monotone targets and noisy estimates under a tabulated weight")
        w = restrict_table([0.0, 0.5, 1.0], [0.0, 0.8, 1.0], 0.0, 1.0)
        for _ in range(50):
            f0 = GridFunction(0.0, 1.0, np.sort(rng.normal(size=201)))
            fhat = f0.with_values(f0.values + rng.normal(scale=0.5, size=201))
            for p in (1.0, 2.0, 4.0, math.inf):
                story.expect(
                    weighted_rearranged_error(fhat, f0, w, p)
                    <= weighted_lp_error(fhat, f0, w, p) + 1e-12
                )


class TestEvalInterval:
    def test_nodes_follow_the_midpoint_rule(self) -> None:
        assert EvalInterval.distribution(0.0, 1.0).nodes(2).tolist() == [0.25, 0.75]

    @pytest.mark.parametrize(
        ("kind", "lower", "upper"),
        [
            (CurveDomain.CDF, 1.0, 1.0),
            (CurveDomain.CDF, -math.inf, 1.0),
            (CurveDomain.QUANTILE, 0.0, 0.5),
            (CurveDomain.QUANTILE, 0.5, 1.0),
        ],
    )
    def test_invalid_bounds(
        self, kind: CurveDomain, lower: float, upper: float
    ) -> None:
        with pytest.raises(DomainError):
            EvalInterval(kind, lower, upper)


class TestWeights:
    def test_restrict_table_renormalizes(self) -> None:
        w = restrict_table([-5.0, 0.0, 5.0], [0.0, 0.5, 1.0], -1.0, 1.0)
        assert (w.lower, w.upper) == (-1.0, 1.0)
        assert w.cdf(np.array([-1.0, 0.0, 1.0])).tolist() == pytest.approx(
            [0.0, 0.5, 1.0]
        )

    def test_restrict_table_needs_coverage(self) -> None:
        with pytest.raises(DomainError):
            restrict_table([0.0, 1.0], [0.0, 1.0], -1.0, 1.0)

    def test_build_weight_by_kind(self) -> None:
        curve = GridFunction.from_function(np.sin, -3.0, 3.0, 101)
        assert build_weight(WeightChoice(), curve) is None
        for kind in (WeightKind.UNIFORM, WeightKind.NORMAL, WeightKind.ITERATED):
            weight = build_weight(WeightChoice(kind=kind, iterations=2), curve)
            assert weight is not None
            assert weight.name == kind.value
            assert (weight.lower, weight.upper) == (-3.0, 3.0)
        table = ((-4.0, 0.0, 4.0), (0.0, 0.5, 1.0))
        choice = WeightChoice(kind=WeightKind.FILE, table=table)
        file_weight = build_weight(choice, curve)
        assert file_weight is not None
        assert file_weight.name == "file"
        with pytest.raises(DomainError):
            build_weight(WeightChoice(kind=WeightKind.FILE), curve)

    def test_truth_weight_follows_the_true_distribution(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("the true F_n of the n = 4 Gamma mean on [-3, 3]")
        truth = truth_curve(gamma_model, CDF_INTERVAL, 201)
        expansion = expansion_curve(
            ExpansionSpec(gamma_model.cumulants, 4, 3), CDF_INTERVAL, 201
        )

        story.when("building the truth weight")
        weight = build_weight(
            WeightChoice(kind=WeightKind.TRUTH),
            expansion,
            truth=truth,
            domain=CurveDomain.CDF,
        )

        story.then("it mixes the rescaled F_n 9:1 with the uniform weight")
        assert weight is not None and weight.name == "truth"
        nodes = truth.nodes()
        span = truth.values[-1] - truth.values[0]
        expected = 0.9 * (truth.values - truth.values[0]) / span + 0.1 * (
            (nodes + 3.0) / 6.0
        )
        assert np.allclose(weight.cdf(nodes), expected, atol=1e-12)
        assert float(weight.cdf(np.array([3.0]))[0]) == pytest.approx(1.0)
        assert np.all(np.diff(weight.cdf(nodes)) > 0)

    def test_truth_weight_on_the_quantile_scale_is_uniform(self) -> None:
        curve = GridFunction.from_function(np.sin, 0.005, 0.995, 101)
        weight = build_weight(
            WeightChoice(kind=WeightKind.TRUTH), curve, domain=CurveDomain.QUANTILE
        )
        assert weight is not None and weight.name == "uniform"

    def test_truth_weight_needs_a_true_curve(self) -> None:
        curve = GridFunction.from_function(np.sin, -3.0, 3.0, 101)
        with pytest.raises(DomainError):
            build_weight(WeightChoice(kind=WeightKind.TRUTH), curve)


class TestCurves:
    def test_curve_table_columns(self, gamma_model: SampleMeanModel) -> None:
        table = curve_table(gamma_model, CDF_INTERVAL, 201)
        assert table.columns == (
            "x",
            "truth",
            "first_order",
            "third_order",
            "rearranged_third_order",
        )
        assert len(table.column_values()) == 5
        assert table.expansion_order == 3

    def test_weighted_curve_column(self, gamma_model: SampleMeanModel) -> None:
        table = curve_table(
            gamma_model,
            Q_INTERVAL,
            201,
            orders=(1, 2, 3),
            weight=WeightChoice(kind=WeightKind.NORMAL),
        )
        assert table.columns[0] == "u"
        assert table.columns[-1] == "weighted_rearranged_third_order"
        assert table.weighted_rearranged is not None
        assert np.all(np.diff(table.rearranged.values) >= 0)

    def test_truth_curve_is_monotone(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        for interval in (CDF_INTERVAL, Q_INTERVAL):
            story.expect_nondecreasing(truth_curve(gamma_model, interval, 501).values)


class TestImprovementReport:
    def test_cardinality_and_contraction(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("two sample sizes and the five default norms")
        cdf_report, q_report = improvement_report(
            gamma_model, CDF_INTERVAL, Q_INTERVAL, 201, sample_sizes=(4, 8)
        )
        story.then("each report has ten rows and no ratio exceeds one")
        for report in (cdf_report, q_report):
            assert len(report) == 10
            assert report.sample_sizes() == [4, 8]
            for row in report:
                story.expect(row.ratio <= 1.0 + 1e-12, f"{row}")
                story.expect(row.rearranged <= row.expansion + 1e-12, f"{row}")
        assert cdf_report.domain is CurveDomain.CDF
        assert q_report.domain is CurveDomain.QUANTILE

    def test_rearrangement_helps_small_samples(
        self, gamma_model: SampleMeanModel
    ) -> None:
        _, q_report = improvement_report(
            gamma_model, CDF_INTERVAL, Q_INTERVAL, 201, norms=(2.0,)
        )
        row = q_report.row(4, 2.0)
        assert row.ratio < 1.0

    def test_zero_cumulants_give_unit_ratio(self, gamma_model: SampleMeanModel) -> None:
        cdf_report, q_report = improvement_report(
            gamma_model,
            CDF_INTERVAL,
            Q_INTERVAL,
            201,
            cumulants=Cumulants(0.0, 0.0),
        )
        for row in (*cdf_report, *q_report):
            assert row.ratio == 1.0
            assert row.rearranged == row.expansion

    def test_weighted_report_is_labelled(self, gamma_model: SampleMeanModel) -> None:
        cdf_report, _ = improvement_report(
            gamma_model,
            CDF_INTERVAL,
            Q_INTERVAL,
            201,
            weight=WeightChoice(kind=WeightKind.NORMAL),
            norms=(1.0, 2.0),
        )
        assert cdf_report.weight == "normal"
        assert all(row.ratio <= 1.0 + 1e-12 for row in cdf_report)

    def test_truth_weighted_report_never_hurts(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("the true F_n as the weight measure")
        reports = improvement_report(
            gamma_model,
            CDF_INTERVAL,
            Q_INTERVAL,
            201,
            sample_sizes=(4, 8),
            weight=WeightChoice(kind=WeightKind.TRUTH),
        )
        story.then("every weighted cell improves or stays put")
        for report in reports:
            assert report.weight == "truth"
            for row in report:
                story.expect(row.rearranged <= row.expansion + 1e-12)

    def test_coarse_mesh_is_rejected(self, gamma_model: SampleMeanModel) -> None:
        with pytest.raises(DomainError):
            improvement_report(gamma_model, CDF_INTERVAL, Q_INTERVAL, 100)

    def test_interval_roles_are_checked(self, gamma_model: SampleMeanModel) -> None:
        with pytest.raises(DomainError):
            improvement_report(gamma_model, Q_INTERVAL, CDF_INTERVAL, 201)


class TestMeshRefinement:
    def test_midpoint_error_converges_to_the_integral(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("the first-order quantile error at the default mesh")
        spec = ExpansionSpec(gamma_model.cumulants, gamma_model.sample_size, 1)
        coarse = lp_error(
            expansion_curve(spec, Q_INTERVAL, 1001),
            truth_curve(gamma_model, Q_INTERVAL, 1001),
            2.0,
        )
        story.when("the same integral is taken by the trapezoid rule on a finer mesh")
        nodes = np.linspace(Q_INTERVAL.lower, Q_INTERVAL.upper, 20001)
        fine_gap = (
            expansion_curve(spec, Q_INTERVAL, 20001).evaluate(nodes)
            - truth_curve(gamma_model, Q_INTERVAL, 20001).evaluate(nodes)
        )
        reference = math.sqrt(trapezoid(fine_gap**2, nodes))
        story.then("both agree to three digits")
        story.expect_close(coarse, reference, rel_tol=1e-3)

    def test_report_is_stable_when_the_mesh_doubles(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("the L1 and L2 reports at mesh 501 and mesh 1002")

        def report_at(mesh: int) -> tuple[ErrorReport, ErrorReport]:
            return improvement_report(
                gamma_model,
                CDF_INTERVAL,
                Q_INTERVAL,
                mesh,
                sample_sizes=(4, 8),
                norms=(1.0, 2.0),
            )

        coarse, fine = report_at(501), report_at(1002)

        story.then("every cell moves by less than one percent")
        for coarse_report, fine_report in zip(coarse, fine):
            for left, right in zip(coarse_report, fine_report):
                for name in ("baseline", "expansion", "rearranged"):
                    story.expect_close(
                        getattr(left, name),
                        getattr(right, name),
                        rel_tol=1e-2,
                        abs_tol=1e-4,
                        label=f"{name} n={left.sample_size} p={left.norm}",
                    )


class TestErrorBounds:
    def test_every_cell_is_sandwiched(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("both tables over n = 4, 8, 16, 32 and all five norms")
        reports = improvement_report(
            gamma_model,
            CDF_INTERVAL,
            Q_INTERVAL,
            201,
            sample_sizes=(4, 8, 16, 32),
        )

        story.then("0 <= rearranged <= expansion and Lp <= Linf * length^(1/p)")
        for report, interval in zip(reports, (CDF_INTERVAL, Q_INTERVAL)):
            length = interval.upper - interval.lower
            for row in report:
                story.expect(0.0 <= row.rearranged <= row.expansion + 1e-12)
                if math.isinf(row.norm):
                    continue
                sup = report.row(row.sample_size, math.inf)
                scale = length ** (1.0 / row.norm) + 1e-12
                story.expect(row.baseline <= sup.baseline * scale)
                story.expect(row.expansion <= sup.expansion * scale)
                story.expect(row.rearranged <= sup.rearranged * scale)

    def test_first_order_error_shrinks_with_n(
        self, story: Scenario, gamma_model: SampleMeanModel
    ) -> None:
        story.given("the normal approximation to Gamma(1/16, 16) means")
        reports = improvement_report(
            gamma_model,
            CDF_INTERVAL,
            Q_INTERVAL,
            1001,
            sample_sizes=(4, 8, 16, 32),
            norms=(1.0, 2.0),
        )

        story.then("its L1 and L2 errors fall strictly as n doubles")
        for report in reports:
            for p in (1.0, 2.0):
                errors = [report.row(n, p).baseline for n in (4, 8, 16, 32)]
                story.expect(
                    all(later < earlier for earlier, later in zip(errors, errors[1:])),
                    f"{report.domain.value} p={p}: {errors}",
                )
