"""Provide Lp error metrics, improvement reports and the coupling simulation.

All errors are computed on the shared midpoint mesh of an `EvalInterval`.
Finite-p errors are ``(sum |fhat - f0|^p * h)^(1/p)`` with cell width ``h``,
the exact integral of the step functions the grids represent.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..constants import (
    DEFAULT_MESH,
    DEFAULT_ORDERS,
    DEFAULT_Q_INTERVAL,
    MIN_COUPLING_DRAWS,
    MIN_REPORT_MESH,
    TABLE_NORMS,
    CurveDomain,
    PopulationFamily,
    WeightKind,
)
from ..exceptions import ContractError, DomainError
from ..result import CouplingResult, CurveTable, ErrorReport, ErrorRow
from .distributions import (
    Cumulants,
    SampleMeanModel,
    mc_cdf,
    simulate_standardized_means,
    true_cdf,
    true_quantile,
)
from .expansions import ExpansionSpec, cornish_fisher_quantile, edgeworth_cdf
from .rearrangement import (
    GridFunction,
    WeightCdf,
    iterated_weight,
    midpoints,
    normal_weight,
    rearrange,
    require_same_mesh,
    resample_on_weight,
    tabulated_weight,
    uniform_weight,
    weighted_rearrange,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class EvalInterval:
    """Define the interval errors are measured on.

    Quantile intervals are ``[eps, 1 - eps]``-style subsets of (0, 1);
    distribution intervals are any finite ``[lower, upper]``.
    """

    kind: CurveDomain
    lower: float
    upper: float

    def __post_init__(self) -> None:
        """Validate the bounds for the interval kind."""
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError(
                "Interval bounds must be finite",
                parameter=self.kind.value,
                value=(self.lower, self.upper),
            )
        if not self.lower < self.upper:
            raise DomainError(
                "Interval needs lower < upper",
                parameter=self.kind.value,
                value=(self.lower, self.upper),
            )
        if self.kind is CurveDomain.QUANTILE and not (
            0.0 < self.lower and self.upper < 1.0
        ):
            raise DomainError(
                "Quantile interval must lie strictly inside (0, 1)",
                parameter=self.kind.value,
                value=(self.lower, self.upper),
            )

    @classmethod
    def distribution(cls, lower: float, upper: float) -> EvalInterval:
        return cls(CurveDomain.CDF, lower, upper)

    @classmethod
    def quantile(cls, lower: float, upper: float) -> EvalInterval:
        return cls(CurveDomain.QUANTILE, lower, upper)

    def nodes(self, mesh: int) -> FloatArray:
        return midpoints(self.lower, self.upper, mesh)


def _check_norm(p: float) -> None:
    if math.isnan(p) or p < 1.0:
        raise DomainError("Norm exponent p must be >= 1", parameter="p", value=p)


def lp_error(fhat: GridFunction, f0: GridFunction, p: float) -> float:
    """Return the Lp distance between two grid functions on one mesh.

    Raises:
        `ContractError`: If the meshes differ.
        `DomainError`: If ``p < 1``.

    """
    require_same_mesh(fhat, f0)
    _check_norm(p)
    gap = np.abs(fhat.values - f0.values)
    if math.isinf(p):
        return float(gap.max())
    peak = float(gap.max())
    if peak == 0.0:
        return 0.0
    # Scale by the peak before powering to keep large p away from overflow.
    scaled = gap / peak
    return peak * float((np.sum(scaled**p) * fhat.cell_width) ** (1.0 / p))


def _interval_mass(f: GridFunction, p: float) -> float:
    return 1.0 if math.isinf(p) else (f.upper - f.lower) ** (1.0 / p)


def weighted_lp_error(
    fhat: GridFunction, f0: GridFunction, w: WeightCdf, p: float
) -> float:
    """Return the Lp distance under ``(b - a) dw``, computed in ``u = w(x)``.

    The measure carries the length of the interval, so the uniform weight
    reproduces `lp_error`.
    """
    require_same_mesh(fhat, f0)
    distance = lp_error(resample_on_weight(fhat, w), resample_on_weight(f0, w), p)
    return _interval_mass(fhat, p) * distance


def weighted_rearranged_error(
    fhat: GridFunction, f0: GridFunction, w: WeightCdf, p: float
) -> float:
    """Return the weighted error of the weighted rearrangement of ``fhat``.

    Scored as ``|| (fhat o w^-1)* - f0 o w^-1 ||_p`` on the u-mesh, the form in
    which the weighted contraction holds exactly on the grid.
    """
    require_same_mesh(fhat, f0)
    distance = lp_error(
        rearrange(resample_on_weight(fhat, w)), resample_on_weight(f0, w), p
    )
    return _interval_mass(fhat, p) * distance


@dataclass(frozen=True)
class WeightChoice:
    """Define how to build a weight for a curve: family plus its parameters."""

    kind: WeightKind = WeightKind.NONE
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    iterations: int = 1

    @property
    def enabled(self) -> bool:
        return self.kind is not WeightKind.NONE


def restrict_table(
    xs: Sequence[float], levels: Sequence[float], lower: float, upper: float
) -> WeightCdf:
    """Return the tabulated weight restricted and renormalized to ``[lower, upper]``.

    Raises:
        `DomainError`: If the table does not cover the interval.

    """
    knots = np.asarray(xs, dtype=float)
    values = np.asarray(levels, dtype=float)
    if knots.size < 2 or knots[0] > lower or knots[-1] < upper:
        raise DomainError(
            "Weight table does not cover the evaluation interval",
            parameter="weight_file",
            value=(lower, upper),
        )
    inner = (knots > lower) & (knots < upper)
    new_knots = np.concatenate(([lower], knots[inner], [upper]))
    new_levels = np.interp(new_knots, knots, values)
    return tabulated_weight(new_knots, new_levels)


def build_weight(
    choice: WeightChoice,
    curve: GridFunction,
    *,
    truth: GridFunction | None = None,
    domain: CurveDomain = CurveDomain.CDF,
) -> WeightCdf | None:
    """Return the weight ``choice`` describes for ``curve``'s interval.

    ``iterated`` weights are built from ``curve`` itself and refined
    ``choice.iterations`` times through weighted rearrangement. ``truth``
    weights use the true distribution function, mixed with the uniform weight
    where it is flat; on the quantile scale that measure is already uniform.

    Raises:
        `DomainError`: If a file weight has no table or a truth weight on the
            distribution scale has no true curve.

    """
    lower, upper = curve.lower, curve.upper
    if choice.kind is WeightKind.NONE:
        return None
    if choice.kind is WeightKind.UNIFORM:
        return uniform_weight(lower, upper)
    if choice.kind is WeightKind.NORMAL:
        return normal_weight(lower, upper)
    if choice.kind is WeightKind.FILE:
        if choice.table is None:
            raise DomainError("File weight needs a table", parameter="weight_file")
        return restrict_table(choice.table[0], choice.table[1], lower, upper)
    if choice.kind is WeightKind.TRUTH:
        if domain is CurveDomain.QUANTILE:
            return uniform_weight(lower, upper)
        if truth is None:
            raise DomainError("Truth weight needs the true curve", parameter="truth")
        return iterated_weight(truth, name="truth")
    weight = iterated_weight(curve)
    for _ in range(choice.iterations - 1):
        weight = iterated_weight(weighted_rearrange(curve, weight))
    return weight


def truth_curve(
    model: SampleMeanModel,
    interval: EvalInterval,
    mesh: int,
    *,
    draws: int | None = None,
    seed: int | None = None,
) -> GridFunction:
    """Return the true F_n or Q_n on the interval's mesh.

    Without a closed form (lognormal) the distribution function falls back to
    `mc_cdf` when ``draws`` and ``seed`` are given.
    """
    nodes = interval.nodes(mesh)
    if interval.kind is CurveDomain.QUANTILE:
        values = true_quantile(model, nodes)
    elif model.family is not PopulationFamily.GAMMA and draws and seed is not None:
        values = mc_cdf(model, nodes, draws, seed)
    else:
        values = true_cdf(model, nodes)
    return GridFunction(interval.lower, interval.upper, np.asarray(values))


def expansion_curve(
    spec: ExpansionSpec, interval: EvalInterval, mesh: int
) -> GridFunction:
    """Return the raw Edgeworth or Cornish-Fisher curve on the interval's mesh."""
    nodes = interval.nodes(mesh)
    if interval.kind is CurveDomain.QUANTILE:
        values = cornish_fisher_quantile(spec, nodes)
    else:
        values = edgeworth_cdf(spec, nodes)
    return GridFunction(interval.lower, interval.upper, np.asarray(values))


def curve_table(
    model: SampleMeanModel,
    interval: EvalInterval,
    mesh: int,
    *,
    orders: Sequence[int] = DEFAULT_ORDERS,
    cumulants: Cumulants | None = None,
    weight: WeightChoice | None = None,
    draws: int | None = None,
    seed: int | None = None,
) -> CurveTable:
    """Return truth, expansion and rearranged curves for one model and domain."""
    effective = cumulants or model.cumulants
    truth = truth_curve(model, interval, mesh, draws=draws, seed=seed)
    approximations = {
        order: expansion_curve(
            ExpansionSpec(effective, model.sample_size, order), interval, mesh
        )
        for order in sorted(set(orders))
    }
    top = approximations[max(approximations)]
    weighted = None
    if weight is not None and weight.enabled:
        w = build_weight(weight, top, truth=truth, domain=interval.kind)
        if w is not None:
            weighted = weighted_rearrange(top, w)
    return CurveTable(
        domain=interval.kind,
        sample_size=model.sample_size,
        truth=truth,
        approximations=approximations,
        rearranged=rearrange(top),
        weighted_rearranged=weighted,
    )


def _report(
    tables: Sequence[CurveTable],
    domain: CurveDomain,
    baseline_order: int,
    expansion_order: int,
    norms: Sequence[float],
    weight: WeightChoice | None,
) -> ErrorReport:
    rows: list[ErrorRow] = []
    for table in tables:
        truth = table.truth
        baseline = table.approximations[baseline_order]
        expansion = table.approximations[expansion_order]
        w = (
            build_weight(weight, expansion, truth=truth, domain=domain)
            if weight is not None
            else None
        )
        for p in norms:
            if w is None:
                row = ErrorRow(
                    sample_size=table.sample_size,
                    norm=p,
                    baseline=lp_error(baseline, truth, p),
                    expansion=lp_error(expansion, truth, p),
                    rearranged=lp_error(rearrange(expansion), truth, p),
                )
            else:
                row = ErrorRow(
                    sample_size=table.sample_size,
                    norm=p,
                    baseline=weighted_lp_error(baseline, truth, w, p),
                    expansion=weighted_lp_error(expansion, truth, w, p),
                    rearranged=weighted_rearranged_error(expansion, truth, w, p),
                )
            rows.append(row)
    return ErrorReport(
        domain=domain,
        baseline_order=baseline_order,
        expansion_order=expansion_order,
        rows=tuple(rows),
        weight=weight.kind.value if weight is not None else None,
    )


def improvement_report(
    model: SampleMeanModel,
    interval_cdf: EvalInterval,
    interval_q: EvalInterval,
    mesh: int,
    *,
    sample_sizes: Sequence[int] | None = None,
    orders: Sequence[int] = DEFAULT_ORDERS,
    cumulants: Cumulants | None = None,
    weight: WeightChoice | None = None,
    norms: Sequence[float] = TABLE_NORMS,
) -> tuple[ErrorReport, ErrorReport]:
    """Return the distribution-domain and quantile-domain error reports.

    For every sample size the truth, the baseline (lowest configured order),
    the expansion (highest order) and its rearrangement are built on the
    interval meshes and scored in every norm. With ``weight`` set the same
    cells are scored in the weighted norm instead.

    Args:
        model: Population and default sample size; needs a closed-form truth.
        interval_cdf: Distribution-domain interval.
        interval_q: Quantile-domain interval.
        mesh: Number of mesh cells, at least 101.
        sample_sizes: Sample sizes to tabulate; defaults to the model's own.
        orders: Expansion orders; the first is the baseline, the last is
            rearranged.
        cumulants: Override for the population cumulants (synthetic checks).
        weight: Optional weighted scoring.
        norms: Norm exponents to report.

    Raises:
        `DomainError`: If the mesh is too coarse or an order is invalid.
        `UnsupportedOracleError`: For populations without a closed-form truth.

    """
    if mesh < MIN_REPORT_MESH:
        raise DomainError(
            f"Reports need a mesh of at least {MIN_REPORT_MESH}",
            parameter="mesh",
            value=mesh,
        )
    if not orders:
        raise DomainError("At least one expansion order is required", parameter="order")
    if interval_cdf.kind is not CurveDomain.CDF or (
        interval_q.kind is not CurveDomain.QUANTILE
    ):
        raise DomainError("Interval kinds do not match their roles", parameter="kind")
    baseline_order, expansion_order = orders[0], orders[-1]
    sizes = list(sample_sizes) if sample_sizes else [model.sample_size]

    reports = []
    for interval in (interval_cdf, interval_q):
        tables = []
        for n in sizes:
            tables.append(
                curve_table(
                    model.with_sample_size(n),
                    interval,
                    mesh,
                    orders=orders,
                    cumulants=cumulants,
                )
            )
            logger.info("Built %s curves for n=%d", interval.kind.value, n)
        reports.append(
            _report(
                tables, interval.kind, baseline_order, expansion_order, norms, weight
            )
        )
    return reports[0], reports[1]


@dataclass(frozen=True, eq=False)
class CouplingSample:
    """Define simulated statistics ``X_n`` with their levels ``U = F_n(X_n)``."""

    statistics: FloatArray
    levels: FloatArray

    def __len__(self) -> int:
        return int(self.statistics.size)


def coupling_sample(model: SampleMeanModel, draws: int, seed: int) -> CouplingSample:
    """Simulate ``X_n`` and map it through the closed-form F_n.

    Raises:
        `UnsupportedOracleError`: For populations without a closed-form F_n.

    """
    # Fail before simulating when there is no closed-form F_n.
    true_cdf(model, 0.0)
    simulated = simulate_standardized_means(model, draws, seed)
    levels = np.asarray(true_cdf(model, simulated), dtype=np.float64)
    return CouplingSample(statistics=simulated, levels=levels)


def _restricted_moment(
    gaps: FloatArray, kept: NDArray[np.bool_], p: float, draws: int
) -> tuple[float, float]:
    """Return ``(E[1 |gap|^p])^(1/p)`` and its delta-method standard error."""
    contributions = np.zeros(draws)
    contributions[kept] = np.abs(gaps) ** p
    mean = float(contributions.mean())
    if mean == 0.0:
        return 0.0, 0.0
    mean_se = float(contributions.std(ddof=1)) / math.sqrt(draws)
    moment = mean ** (1.0 / p)
    return moment, mean_se * (1.0 / p) * mean ** (1.0 / p - 1.0)


def coupling_mc(
    model: SampleMeanModel,
    spec: ExpansionSpec,
    p: float,
    draws: int,
    seed: int,
    *,
    interval: EvalInterval | None = None,
    mesh: int = DEFAULT_MESH,
    sample: CouplingSample | None = None,
) -> CouplingResult:
    """Compare ``Q_hat(U)`` and its rearrangement as couplings to ``X_n``.

    ``X_n`` is simulated, ``U = F_n(X_n)`` is computed with the closed-form
    distribution function and only draws with ``U`` inside the quantile
    interval count. The rearranged expansion is evaluated off-mesh by linear
    interpolation. A precomputed ``sample`` (from `coupling_sample` with the
    same model, draws and seed) lets several cells share one simulation.

    Raises:
        `DomainError`: If ``p`` is not 1 or 2 or ``draws`` is below 10,000.
        `UnsupportedOracleError`: For populations without a closed-form F_n.

    """
    if p not in (1, 2):
        raise DomainError(
            "Coupling moments support p in {1, 2}", parameter="p", value=p
        )
    if draws < MIN_COUPLING_DRAWS:
        raise DomainError(
            f"Coupling needs at least {MIN_COUPLING_DRAWS} draws",
            parameter="draws",
            value=draws,
        )
    window = interval or EvalInterval.quantile(*DEFAULT_Q_INTERVAL)
    if sample is None:
        sample = coupling_sample(model, draws, seed)
    elif len(sample) != draws:
        raise ContractError(
            "Coupling sample size does not match draws",
            context={"sample": len(sample), "draws": draws},
        )
    simulated, u = sample.statistics, sample.levels
    kept = (u >= window.lower) & (u <= window.upper)
    u_kept = u[kept]
    x_kept = simulated[kept]

    raw_gap = x_kept - np.asarray(cornish_fisher_quantile(spec, u_kept))
    rearranged_curve = rearrange(expansion_curve(spec, window, mesh))
    rearranged_gap = x_kept - rearranged_curve.evaluate(u_kept)

    raw, raw_se = _restricted_moment(raw_gap, kept, p, draws)
    rearranged, rearranged_se = _restricted_moment(rearranged_gap, kept, p, draws)
    logger.debug(
        "Coupling n=%d J=%d p=%g: raw %.6g, rearranged %.6g",
        spec.sample_size,
        spec.order,
        p,
        raw,
        rearranged,
    )
    return CouplingResult(
        raw_moment=raw,
        rearranged_moment=rearranged,
        std_error=max(raw_se, rearranged_se),
        kept_fraction=float(kept.mean()),
    )


__all__ = [
    "EvalInterval",
    "CouplingSample",
    "WeightChoice",
    "build_weight",
    "coupling_sample",
    "coupling_mc",
    "curve_table",
    "expansion_curve",
    "improvement_report",
    "lp_error",
    "restrict_table",
    "truth_curve",
    "weighted_lp_error",
    "weighted_rearranged_error",
]
