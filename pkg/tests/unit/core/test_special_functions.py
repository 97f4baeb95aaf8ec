from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from rearranged_expansions.core.special_functions import (
    inverse_regularized_gamma_p,
    log_gamma,
    regularized_gamma_p,
    regularized_gamma_q,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from rearranged_expansions.exceptions import DomainError
from tests.bdd import Scenario

pytestmark = pytest.mark.unit


class TestNormalDistribution:
    def test_cdf_reference_points(self, story: Scenario) -> None:
        story.given("the standard normal distribution function")
        story.then("it is one half at zero and 0.975 at the two-sided 5% point")
        story.expect_close(float(std_normal_cdf(0.0)), 0.5, abs_tol=1e-15)
        story.expect_close(float(std_normal_cdf(1.959964)), 0.975, abs_tol=1e-6)

    def test_cdf_symmetry(self, story: Scenario) -> None:
        xs = np.linspace(-8.0, 8.0, 161)
        story.when("Phi(x) + Phi(-x) is evaluated on [-8, 8]")
        total = np.asarray(std_normal_cdf(xs)) + np.asarray(std_normal_cdf(-xs))
        story.then("every sum is one within 1e-12")
        assert np.max(np.abs(total - 1.0)) <= 1e-12

    def test_cdf_matches_scipy_including_lower_tail(self, story: Scenario) -> None:
        xs = np.linspace(-30.0, 6.0, 721)
        story.given("scipy's ndtr as an independent oracle")
        ours = np.asarray(std_normal_cdf(xs))
        reference = special.ndtr(xs)
        story.then("absolute error stays below 1e-12 and tails keep relative accuracy")
        assert np.max(np.abs(ours - reference)) < 1e-12
        tail = xs < -5
        assert np.max(np.abs(ours[tail] / reference[tail] - 1.0)) < 1e-9

    def test_pdf_values(self, story: Scenario) -> None:
        story.expect_close(float(std_normal_pdf(0.0)), 0.3989422804, abs_tol=1e-9)
        assert std_normal_pdf(1.3) == std_normal_pdf(-1.3)
        assert float(std_normal_pdf(10.0)) < 1e-21

    def test_quantile_reference_points(self, story: Scenario) -> None:
        story.expect_close(float(std_normal_quantile(0.5)), 0.0, abs_tol=1e-15)
        story.expect_close(float(std_normal_quantile(0.975)), 1.959964, abs_tol=1e-6)
        us = np.linspace(0.001, 0.999, 999)
        sums = np.asarray(std_normal_quantile(us)) + np.asarray(
            std_normal_quantile(1.0 - us)
        )
        assert np.max(np.abs(sums)) < 1e-9

    def test_quantile_roundtrip(self, story: Scenario) -> None:
        story.given("a thousand probabilities spread over (0, 1)")
        us = np.linspace(1e-6, 1.0 - 1e-6, 1000)
        story.when("they pass through the quantile and back through the cdf")
        back = np.asarray(std_normal_cdf(std_normal_quantile(us)))
        story.then("the roundtrip error is at most 1e-9")
        assert np.max(np.abs(back - us)) <= 1e-9

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_rejects_closed_unit_interval(self, u: float) -> None:
        with pytest.raises(DomainError) as excinfo:
            std_normal_quantile(u)
        assert excinfo.value.parameter == "u"

    def test_non_finite_arguments_raise(self) -> None:
        with pytest.raises(DomainError):
            std_normal_cdf(math.inf)
        with pytest.raises(DomainError):
            std_normal_pdf(math.nan)

    def test_scalars_in_scalars_out(self) -> None:
        assert isinstance(std_normal_cdf(0.3), float)
        assert isinstance(std_normal_quantile(0.3), float)
        assert std_normal_cdf(np.array([0.3])).shape == (1,)


class TestIncompleteGamma:
    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_exponential_special_case(self, story: Scenario, x: float) -> None:
        story.given("shape one, where P(1, x) = 1 - exp(-x)")
        story.expect_close(
            float(regularized_gamma_p(1.0, x)), -math.expm1(-x), abs_tol=1e-10
        )

    def test_zero_argument_and_infinite_argument(self) -> None:
        assert regularized_gamma_p(2.5, 0.0) == 0.0
        assert regularized_gamma_q(2.5, 0.0) == 1.0
        assert regularized_gamma_p(2.5, math.inf) == pytest.approx(1.0)

    def test_half_shape_is_erf(self, story: Scenario) -> None:
        story.expect_close(
            float(regularized_gamma_p(0.5, 1.0)), 0.842700793, abs_tol=1e-8
        )

    def test_matches_scipy_over_shapes(self, story: Scenario) -> None:
        story.given("shapes from 1/16 to 125 and arguments across both regimes")
        shapes = np.array([0.0625, 0.25, 0.5, 1.0, 4.0, 16.0, 125.0])
        xs = np.geomspace(1e-6, 1e3, 60)
        a, x = np.meshgrid(shapes, xs)
        ours_p = np.asarray(regularized_gamma_p(a, x))
        ours_q = np.asarray(regularized_gamma_q(a, x))
        story.then("P and Q agree with scipy's gammainc/gammaincc within 1e-10")
        assert np.max(np.abs(ours_p - special.gammainc(a, x))) < 1e-10
        assert np.max(np.abs(ours_q - special.gammaincc(a, x))) < 1e-10
        assert np.max(np.abs(ours_p + ours_q - 1.0)) < 1e-12

    def test_nondecreasing_in_x(self, story: Scenario) -> None:
        values = np.asarray(regularized_gamma_p(0.0625, np.linspace(0.0, 5.0, 2001)))
        story.expect_nondecreasing(values, label="P(1/16, x)")

    def test_domain_errors(self) -> None:
        with pytest.raises(DomainError):
            regularized_gamma_p(0.0, 1.0)
        with pytest.raises(DomainError):
            regularized_gamma_p(1.0, -0.5)
        with pytest.raises(DomainError):
            regularized_gamma_q(-1.0, 1.0)

    def test_log_gamma_matches_scipy(self) -> None:
        a = np.geomspace(1e-3, 1e3, 200)
        assert np.max(np.abs(np.asarray(log_gamma(a)) - special.gammaln(a))) < 1e-10
        with pytest.raises(DomainError):
            log_gamma(0.0)


class TestInverseIncompleteGamma:
    @pytest.mark.parametrize("p", [1e-8, 0.1, 0.5, 0.9, 1.0 - 1e-8])
    def test_exponential_special_case(self, story: Scenario, p: float) -> None:
        story.expect_close(
            float(inverse_regularized_gamma_p(1.0, p)),
            -math.log1p(-p),
            rel_tol=1e-9,
            abs_tol=1e-12,
        )

    @pytest.mark.parametrize("a", [0.0625, 1.0, 4.0])
    def test_roundtrip(self, story: Scenario, a: float) -> None:
        story.given(f"shape {a} and probabilities across (0, 1)")
        ps = np.linspace(0.001, 0.999, 400)
        xs = inverse_regularized_gamma_p(a, ps)
        story.then("P(a, inverse(a, p)) returns p within 1e-9")
        assert np.max(np.abs(np.asarray(regularized_gamma_p(a, xs)) - ps)) <= 1e-9

    @pytest.mark.parametrize("a", [0.0625, 0.25, 1.0, 64.0])
    def test_roundtrip_at_random_probabilities(
        self, story: Scenario, rng: np.random.Generator, a: float
    ) -> None:
        story.given(f"shape {a} and 1000 random probabilities")
        ps = rng.uniform(1e-6, 1.0 - 1e-6, size=1000)

        story.when("inverting and mapping back through P(a, .)")
        xs = np.asarray(inverse_regularized_gamma_p(a, ps))
        back = np.asarray(regularized_gamma_p(a, xs))

        story.then("every probability comes back within 1e-9")
        assert np.max(np.abs(back - ps)) <= 1e-9
        story.then("the inverse agrees with scipy to 1e-8 relative")
        reference = special.gammaincinv(a, ps)
        assert np.max(np.abs(xs / reference - 1.0)) < 1e-8

    def test_first_iterate_below_the_root_keeps_iterating(
        self, story: Scenario
    ) -> None:
        story.given("probabilities whose starting point sits left of the root")
        ps = np.array([0.1, 0.3, 0.5, 0.7, 0.9])

        story.when("inverting the exponential law")
        xs = np.asarray(inverse_regularized_gamma_p(1.0, ps))

        story.then("each value matches -log(1 - p) to 1e-12 relative")
        assert np.allclose(xs, -np.log1p(-ps), rtol=1e-12, atol=0.0)

    def test_inverse_is_strictly_increasing(self, story: Scenario) -> None:
        ps = np.linspace(0.0005, 0.9995, 2000)
        for a in (0.25, 0.5, 1.0, 2.0):
            xs = np.asarray(inverse_regularized_gamma_p(a, ps))
            story.expect(bool(np.all(np.diff(xs) > 0)), f"increasing at a={a}")

    def test_median_of_shape_two(self, story: Scenario) -> None:
        story.expect_close(
            float(inverse_regularized_gamma_p(2.0, 0.5)), 1.678346990, abs_tol=1e-6
        )

    def test_matches_scipy_for_tiny_shapes(self) -> None:
        ps = np.array([1e-6, 1e-3, 0.2, 0.6, 0.95, 0.999999])
        ours = np.asarray(inverse_regularized_gamma_p(0.0625, ps))
        reference = special.gammaincinv(0.0625, ps)
        assert np.max(np.abs(ours / reference - 1.0)) < 1e-8

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_endpoints_rejected(self, p: float) -> None:
        with pytest.raises(DomainError) as excinfo:
            inverse_regularized_gamma_p(2.0, p)
        assert excinfo.value.parameter == "p"
