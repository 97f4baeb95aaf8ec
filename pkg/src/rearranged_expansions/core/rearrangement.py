"""Provide the increasing rearrangement of grid-sampled functions.

A `GridFunction` on ``[a, b]`` with ``m`` values stores them at the cell
midpoints ``a + (i + 1/2)(b - a)/m``, each value carrying mass ``1/m``. Under
that convention the increasing rearrangement of the sample is exactly the
sorted sample, and every Lp quadrature in `metrics` is the exact integral of
the step function the grid represents.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from ..constants import ITERATED_WEIGHT_UNIFORM_SHARE
from ..exceptions import ContractError, DomainError
from .special_functions import std_normal_cdf, std_normal_quantile

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
Evaluator = Callable[[FloatArray], FloatArray]

WEIGHT_CHECK_TOLERANCE = 1e-9
ETA_GRID_POINTS = 11
ETA_LOCAL_STARTS = 8


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Define a function sampled at the cell midpoints of ``[lower, upper]``."""

    lower: float
    upper: float
    values: FloatArray

    def __post_init__(self) -> None:
        """Validate the domain and freeze the values."""
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError(
                "Grid bounds must be finite",
                parameter="bounds",
                value=(self.lower, self.upper),
            )
        if not self.lower < self.upper:
            raise DomainError(
                "Grid lower bound must be below the upper bound",
                parameter="bounds",
                value=(self.lower, self.upper),
            )
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size < 2:
            raise DomainError(
                "A grid function needs at least two values",
                parameter="values",
                value=values.size,
            )
        if not np.isfinite(values).all():
            raise DomainError("Grid values must be finite", parameter="values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls, func: Evaluator, lower: float, upper: float, mesh: int
    ) -> GridFunction:
        """Sample ``func`` at the ``mesh`` cell midpoints of ``[lower, upper]``."""
        nodes = midpoints(lower, upper, mesh)
        return cls(lower, upper, np.asarray(func(nodes), dtype=np.float64))

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def cell_width(self) -> float:
        return (self.upper - self.lower) / self.size

    def nodes(self) -> FloatArray:
        """Return the abscissae the values are sampled at."""
        return midpoints(self.lower, self.upper, self.size)

    def evaluate(self, x: ArrayLike) -> FloatArray:
        """Interpolate linearly between nodes, constant beyond the outer nodes."""
        return np.interp(np.asarray(x, dtype=np.float64), self.nodes(), self.values)

    def with_values(self, values: ArrayLike) -> GridFunction:
        """Return a grid function on the same mesh with new values."""
        array = np.asarray(values, dtype=np.float64)
        return GridFunction(self.lower, self.upper, array)

    def same_mesh(self, other: GridFunction) -> bool:
        return (
            self.size == other.size
            and self.lower == other.lower
            and self.upper == other.upper
        )

    def __eq__(self, other: object) -> bool:
        """Compare domain and values exactly."""
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.same_mesh(other) and bool(np.array_equal(self.values, other.values))

    __hash__ = None  # type: ignore[assignment]


def midpoints(lower: float, upper: float, mesh: int) -> FloatArray:
    """Return the ``mesh`` cell midpoints of ``[lower, upper]``."""
    if isinstance(mesh, bool) or int(mesh) != mesh or mesh < 2:
        raise DomainError("mesh must be an integer >= 2", parameter="mesh", value=mesh)
    return lower + (np.arange(int(mesh), dtype=np.float64) + 0.5) * (
        (upper - lower) / int(mesh)
    )


def require_same_mesh(first: GridFunction, second: GridFunction) -> None:
    """Raise `ContractError` unless both functions share one mesh."""
    if not first.same_mesh(second):
        raise ContractError(
            "Grid functions are sampled on different meshes",
            context={
                "first": (first.lower, first.upper, first.size),
                "second": (second.lower, second.upper, second.size),
            },
        )


@dataclass(frozen=True)
class WeightCdf:
    """Define a strictly increasing distribution function on ``[lower, upper]``.

    ``cdf`` maps the interval onto [0, 1] and ``inverse`` maps back. Both are
    vectorized evaluators.
    """

    lower: float
    upper: float
    cdf: Evaluator = field(compare=False)
    inverse: Evaluator = field(compare=False)
    name: str = "custom"

    def __post_init__(self) -> None:
        """Check the endpoint values and the inverse on a grid of midpoints."""
        if not self.lower < self.upper:
            raise DomainError(
                "Weight domain must have lower < upper",
                parameter="bounds",
                value=(self.lower, self.upper),
            )
        ends = np.asarray(self.cdf(np.array([self.lower, self.upper])), dtype=float)
        if abs(ends[0]) > WEIGHT_CHECK_TOLERANCE or abs(ends[1] - 1.0) > (
            WEIGHT_CHECK_TOLERANCE
        ):
            raise DomainError(
                "Weight CDF must map the interval onto [0, 1]",
                parameter=self.name,
                value=tuple(ends),
            )
        points = midpoints(self.lower, self.upper, 64)
        mapped = np.asarray(self.cdf(points), dtype=float)
        if np.any(np.diff(mapped) <= 0):
            raise DomainError(
                "Weight CDF must be strictly increasing", parameter=self.name
            )
        back = np.asarray(self.inverse(mapped), dtype=float)
        scale = max(1.0, abs(self.lower), abs(self.upper))
        if np.max(np.abs(back - points)) > WEIGHT_CHECK_TOLERANCE * scale:
            raise DomainError(
                "Weight CDF is not invertible: inverse(cdf(x)) != x",
                parameter=self.name,
            )


def uniform_weight(lower: float, upper: float) -> WeightCdf:
    """Return the uniform distribution function on ``[lower, upper]``."""
    width = upper - lower

    def cdf(x: FloatArray) -> FloatArray:
        return np.clip((np.asarray(x, dtype=float) - lower) / width, 0.0, 1.0)

    def inverse(u: FloatArray) -> FloatArray:
        return lower + np.clip(np.asarray(u, dtype=float), 0.0, 1.0) * width

    return WeightCdf(lower, upper, cdf, inverse, name="uniform")


def normal_weight(
    lower: float, upper: float, *, loc: float = 0.0, scale: float = 1.0
) -> WeightCdf:
    """Return the normal distribution function restricted to ``[lower, upper]``."""
    if not scale > 0:
        raise DomainError("Normal weight scale must be positive", parameter="scale")
    phi_lo = float(std_normal_cdf((lower - loc) / scale))
    phi_hi = float(std_normal_cdf((upper - loc) / scale))
    mass = phi_hi - phi_lo
    if not mass > 0:
        raise DomainError(
            "Normal weight has no mass on the interval",
            parameter="bounds",
            value=(lower, upper),
        )

    def cdf(x: FloatArray) -> FloatArray:
        clipped = np.clip(np.asarray(x, dtype=float), lower, upper)
        phi = np.asarray(std_normal_cdf((clipped - loc) / scale), dtype=float)
        return np.clip((phi - phi_lo) / mass, 0.0, 1.0)

    def inverse(u: FloatArray) -> FloatArray:
        target = phi_lo + np.clip(np.asarray(u, dtype=float), 0.0, 1.0) * mass
        inside = (target > 0.0) & (target < 1.0)
        safe = np.where(inside, target, 0.5)
        x = loc + scale * np.asarray(std_normal_quantile(safe), dtype=float)
        x = np.where(inside, x, np.where(target <= 0.0, lower, upper))
        return np.clip(x, lower, upper)

    return WeightCdf(lower, upper, cdf, inverse, name="normal")


def tabulated_weight(xs: ArrayLike, cdf_values: ArrayLike) -> WeightCdf:
    """Return a piecewise-linear weight through tabulated ``(x, cdf)`` knots.

    The table is renormalized so that its first value maps to 0 and its last
    to 1; both columns must be strictly increasing.
    """
    knots = np.asarray(xs, dtype=float)
    levels = np.asarray(cdf_values, dtype=float)
    if knots.ndim != 1 or knots.shape != levels.shape or knots.size < 2:
        raise DomainError(
            "Weight table needs two equally long columns with at least two rows",
            parameter="weight_table",
        )
    if np.any(np.diff(knots) <= 0) or np.any(np.diff(levels) <= 0):
        raise DomainError(
            "Weight table columns must be strictly increasing",
            parameter="weight_table",
        )
    levels = (levels - levels[0]) / (levels[-1] - levels[0])

    def cdf(x: FloatArray) -> FloatArray:
        return np.interp(np.asarray(x, dtype=float), knots, levels)

    def inverse(u: FloatArray) -> FloatArray:
        return np.interp(np.asarray(u, dtype=float), levels, knots)

    return WeightCdf(float(knots[0]), float(knots[-1]), cdf, inverse, name="file")


def iterated_weight(
    f: GridFunction,
    *,
    uniform_share: float = ITERATED_WEIGHT_UNIFORM_SHARE,
    name: str = "iterated",
) -> WeightCdf:
    """Return a weight built from the increasing rearrangement of ``f`` itself.

    The rearranged curve, rescaled to [0, 1], is mixed with the uniform weight
    so the result stays strictly increasing. A flat rearrangement leaves only
    the uniform part.
    """
    if not 0.0 < uniform_share <= 1.0:
        raise DomainError(
            "uniform_share must lie in (0, 1]",
            parameter="uniform_share",
            value=uniform_share,
        )
    ordered = np.sort(f.values)
    knots = np.concatenate(([f.lower], f.nodes(), [f.upper]))
    curve = np.concatenate(([ordered[0]], ordered, [ordered[-1]]))
    span = curve[-1] - curve[0]
    share = uniform_share if span > 0 else 1.0
    shape = (curve - curve[0]) / span if span > 0 else np.zeros_like(curve)
    levels = (1.0 - share) * shape + share * (knots - f.lower) / (f.upper - f.lower)
    weight = tabulated_weight(knots, levels)
    return WeightCdf(weight.lower, weight.upper, weight.cdf, weight.inverse, name)


def rearrange(f: GridFunction) -> GridFunction:
    """Return the increasing rearrangement of ``f``: its values sorted."""
    return f.with_values(np.sort(f.values, kind="stable"))


def rearrange_by_definition(f: GridFunction, x: float) -> float:
    """Evaluate ``f*(x) = inf{y : |{f <= y}| >= (x - a)/(b - a)}`` by counting.

    The measure of ``{f <= y}`` is the share of grid values not above ``y``;
    the infimum runs over the sampled values themselves.

    Raises:
        `DomainError`: If ``x`` lies outside ``[lower, upper]``.

    """
    if not f.lower <= x <= f.upper:
        raise DomainError(
            "x must lie inside the grid domain",
            parameter="x",
            value=x,
            context={"lower": f.lower, "upper": f.upper},
        )
    m = f.size
    position = (x - f.lower) / (f.upper - f.lower)
    required = max(1, math.ceil(position * m))
    candidates = np.unique(f.values)
    counts = (f.values[np.newaxis, :] <= candidates[:, np.newaxis]).sum(axis=1)
    return float(candidates[np.argmax(counts >= required)])


def weighted_rearrange(f: GridFunction, w: WeightCdf) -> GridFunction:
    """Return the weighted rearrangement ``(f o w^-1)*(w(x))`` on the mesh of ``f``.

    ``f o w^-1`` is resampled on the midpoint mesh of [0, 1] (linear
    interpolation between the nodes of ``f``), sorted, and read back at
    ``w(x_i)`` for every node ``x_i`` of ``f``.

    Raises:
        `ContractError`: If the weight lives on another interval.

    """
    if (w.lower, w.upper) != (f.lower, f.upper):
        raise ContractError(
            "Weight and grid function live on different intervals",
            context={"weight": (w.lower, w.upper), "grid": (f.lower, f.upper)},
        )
    u_nodes = midpoints(0.0, 1.0, f.size)
    resampled = np.sort(f.evaluate(w.inverse(u_nodes)), kind="stable")
    return f.with_values(np.interp(w.cdf(f.nodes()), u_nodes, resampled))


def resample_on_weight(f: GridFunction, w: WeightCdf) -> GridFunction:
    """Return ``f o w^-1`` sampled on the midpoint mesh of [0, 1]."""
    u_nodes = midpoints(0.0, 1.0, f.size)
    return GridFunction(0.0, 1.0, f.evaluate(w.inverse(u_nodes)))


def sorting_step(
    values: Sequence[float], l: int, m_idx: int  # noqa: E741
) -> list[float]:
    """Exchange an out-of-order pair ``values[l] > values[m_idx]`` with ``l < m_idx``.

    Raises:
        `ContractError`: If the indices are not ordered or the pair is not
            out of order.

    """
    items = [float(v) for v in values]
    if not 0 <= l < m_idx < len(items):
        raise ContractError(
            "sorting_step needs 0 <= l < m_idx < len(values)",
            context={"l": l, "m_idx": m_idx, "length": len(items)},
        )
    if not items[l] > items[m_idx]:
        raise ContractError(
            "sorting_step only exchanges a pair with values[l] > values[m_idx]",
            context={"l": l, "m_idx": m_idx},
        )
    items[l], items[m_idx] = items[m_idx], items[l]
    return items


def is_nondecreasing(values: ArrayLike, slack: float = 0.0) -> bool:
    """Return True when no adjacent pair drops by more than ``slack``."""
    array = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(array) >= -slack))


def decreasing_pairs(values: ArrayLike) -> int:
    """Return the number of strictly decreasing adjacent pairs."""
    return int(np.count_nonzero(np.diff(np.asarray(values, dtype=float)) < 0))


def _eta_points(
    r: FloatArray, epsilon: float, k_lo: float, k_hi: float
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """Map the unit cube onto feasible ``(v, v', t, t')`` with gaps >= epsilon."""
    room = k_hi - epsilon - k_lo
    v = k_lo + r[..., 0] * room
    v_prime = v + epsilon + r[..., 1] * (k_hi - v - epsilon)
    t = k_lo + r[..., 2] * room
    t_prime = t + epsilon + r[..., 3] * (k_hi - t - epsilon)
    return v, v_prime, t, t_prime


def eta_objective(
    p: float,
    v: ArrayLike,
    v_prime: ArrayLike,
    t: ArrayLike,
    t_prime: ArrayLike,
) -> FloatArray:
    """Return ``|v - t'|^p + |v' - t|^p - |v - t|^p - |v' - t'|^p``."""
    low, high = np.asarray(v, dtype=float), np.asarray(v_prime, dtype=float)
    left, right = np.asarray(t, dtype=float), np.asarray(t_prime, dtype=float)
    return (
        np.abs(low - right) ** p
        + np.abs(high - left) ** p
        - np.abs(low - left) ** p
        - np.abs(high - right) ** p
    )


def eta_p(
    p: float,
    epsilon: float,
    k_lo: float,
    k_hi: float,
    *,
    diagnostic: bool = False,
) -> float:
    """Return the strict-gain constant for the Lp norm on the box ``[k_lo, k_hi]``.

    The infimum of `eta_objective` over ``v, v', t, t'`` in the box with
    ``v' >= v + epsilon`` and ``t' >= t + epsilon`` is found by a coarse grid
    search followed by bounded L-BFGS-B refinement from the best grid points.

    Args:
        p: Norm exponent, ``1 < p < inf``; ``p = 1`` only with ``diagnostic``.
        epsilon: Minimal separation, positive.
        k_lo: Lower end of the value box.
        k_hi: Upper end of the value box, ``k_hi - k_lo >= epsilon``.
        diagnostic: Allow ``p = 1``, where the infimum degenerates to 0.

    Raises:
        `DomainError`: If the exponent or the box is infeasible.

    """
    if not math.isfinite(p) or p < 1.0 or (p == 1.0 and not diagnostic):
        raise DomainError(
            "eta_p needs a finite exponent p > 1 (p = 1 only in diagnostic mode)",
            parameter="p",
            value=p,
        )
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise DomainError(
            "epsilon must be positive", parameter="epsilon", value=epsilon
        )
    if not (math.isfinite(k_lo) and math.isfinite(k_hi)) or k_hi - k_lo < epsilon:
        raise DomainError(
            "The box [k_lo, k_hi] must be at least epsilon wide",
            parameter="box",
            value=(k_lo, k_hi),
        )

    axis = np.linspace(0.0, 1.0, ETA_GRID_POINTS)
    cube = np.array(list(itertools.product(axis, repeat=4)))
    values = eta_objective(p, *_eta_points(cube, epsilon, k_lo, k_hi))
    best = float(values.min())
    logger.debug("eta_p grid minimum %.6g for p=%g, epsilon=%g", best, p, epsilon)

    def objective(r: FloatArray) -> float:
        return float(eta_objective(p, *_eta_points(r, epsilon, k_lo, k_hi)))

    bounds = [(0.0, 1.0)] * 4
    for index in np.argsort(values)[:ETA_LOCAL_STARTS]:
        result = minimize(objective, cube[index], method="L-BFGS-B", bounds=bounds)
        best = min(best, float(result.fun))
    return max(0.0, best)


__all__ = [
    "GridFunction",
    "WeightCdf",
    "decreasing_pairs",
    "eta_objective",
    "eta_p",
    "is_nondecreasing",
    "iterated_weight",
    "midpoints",
    "normal_weight",
    "rearrange",
    "rearrange_by_definition",
    "require_same_mesh",
    "resample_on_weight",
    "sorting_step",
    "tabulated_weight",
    "uniform_weight",
    "weighted_rearrange",
]
