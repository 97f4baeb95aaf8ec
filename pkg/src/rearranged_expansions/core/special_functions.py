"""Provide the special functions behind every oracle and expansion.

Everything here accepts either a float or a numpy array and returns the same
kind: scalars in, scalars out. The array path is what the Monte Carlo
oracles use; the scalar path is what the expansions use on single points.

The normal distribution function is computed through the upper regularized
incomplete gamma function, ``Phi(x) = Q(1/2, x^2/2) / 2`` for ``x < 0``, which
keeps the lower tail accurate in relative terms instead of losing it to
``1 - erf`` cancellation.
"""

from __future__ import annotations

import logging
import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import DomainError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
FloatOrArray = Union[float, FloatArray]

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Lanczos approximation, g = 7, nine coefficients.
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

SERIES_EPS = 1e-16
FPMIN = 1e-300
MAX_SERIES_TERMS = 10_000
MAX_FRACTION_TERMS = 10_000
MAX_INVERSION_STEPS = 200
INVERSION_RTOL = 1e-14

# Acklam's rational approximation to the normal quantile.
_ACKLAM_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ACKLAM_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ACKLAM_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ACKLAM_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_ACKLAM_P_LOW = 0.02425


def _to_array(value: ArrayLike, name: str) -> tuple[NDArray[np.float64], bool]:
    """Return ``value`` as a float array plus a flag telling if it was scalar."""
    array = np.asarray(value, dtype=np.float64)
    if np.isnan(array).any():
        raise DomainError(f"{name} must not be NaN", parameter=name, value=value)
    return array, array.ndim == 0


def _from_array(array: NDArray[np.float64], scalar: bool) -> FloatOrArray:
    if scalar:
        return float(array)
    return array


def _require_finite(array: NDArray[np.float64], name: str, value: ArrayLike) -> None:
    if not np.isfinite(array).all():
        raise DomainError(f"{name} must be finite", parameter=name, value=value)


def log_gamma(a: ArrayLike) -> FloatOrArray:
    """Return ``ln Gamma(a)`` for ``a > 0`` (Lanczos, about 1e-15 relative)."""
    array, scalar = _to_array(a, "a")
    _require_finite(array, "a", a)
    if (array <= 0).any():
        raise DomainError("log_gamma requires a > 0", parameter="a", value=a)
    return _from_array(_log_gamma(array), scalar)


def _log_gamma(a: NDArray[np.float64]) -> NDArray[np.float64]:
    small = a < 0.5
    # ln Gamma(a) = ln Gamma(a + 1) - ln a keeps the Lanczos argument >= 0.5.
    shifted = np.where(small, a + 1.0, a)
    z = shifted - 1.0
    series = np.full_like(z, LANCZOS_COEFFICIENTS[0])
    for index, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series = series + coefficient / (z + index)
    t = z + LANCZOS_G + 0.5
    result = LOG_SQRT_2PI + (z + 0.5) * np.log(t) - t + np.log(series)
    return np.where(small, result - np.log(a), result)


def _log_prefactor(a: FloatArray, x: FloatArray) -> FloatArray:
    """Return ``a ln x - x - ln Gamma(a)``, the log of the common prefactor."""
    with np.errstate(divide="ignore"):
        return a * np.log(x) - x - _log_gamma(a)


def _lower_series(a: FloatArray, x: FloatArray) -> FloatArray:
    """Return P(a, x) by its power series; used for ``x < a + 1``."""
    total = 1.0 / a
    term = total.copy()
    denominator = a.copy()
    active = np.ones(a.shape, dtype=bool)
    for iteration in range(MAX_SERIES_TERMS):
        if not active.any():
            logger.debug("Incomplete gamma series converged in %d terms", iteration)
            break
        denominator = np.where(active, denominator + 1.0, denominator)
        term = np.where(active, term * x / denominator, term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) > np.abs(total) * SERIES_EPS
    return total * np.exp(_log_prefactor(a, x))


def _upper_fraction(
    a: NDArray[np.float64], x: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Return Q(a, x) by its continued fraction (modified Lentz); ``x >= a + 1``."""
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for step in range(1, MAX_FRACTION_TERMS + 1):
        if not active.any():
            logger.debug("Incomplete gamma fraction converged in %d terms", step - 1)
            break
        an = -step * (step - a)
        b = b + 2.0
        d_new = an * d + b
        d_new = np.where(np.abs(d_new) < FPMIN, FPMIN, d_new)
        c_new = b + an / c
        c_new = np.where(np.abs(c_new) < FPMIN, FPMIN, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > SERIES_EPS
    return np.exp(_log_prefactor(a, x)) * h


def _gamma_pq(
    a: NDArray[np.float64], x: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (P(a, x), Q(a, x)) with each side computed where it is accurate."""
    a, x = np.broadcast_arrays(a, x)
    a = a.astype(np.float64, copy=True)
    x = x.astype(np.float64, copy=True)
    lower = np.zeros(x.shape)
    upper = np.ones(x.shape)

    infinite = np.isinf(x)
    lower[infinite] = 1.0
    upper[infinite] = 0.0

    series_mask = (x > 0) & (x < a + 1.0) & ~infinite
    if series_mask.any():
        lower[series_mask] = np.minimum(
            _lower_series(a[series_mask], x[series_mask]), 1.0
        )
        upper[series_mask] = 1.0 - lower[series_mask]

    fraction_mask = (x >= a + 1.0) & ~infinite
    if fraction_mask.any():
        upper[fraction_mask] = np.minimum(
            _upper_fraction(a[fraction_mask], x[fraction_mask]), 1.0
        )
        lower[fraction_mask] = 1.0 - upper[fraction_mask]
    return lower, upper


def _validate_gamma_args(
    a: ArrayLike, x: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64], bool]:
    a_arr, a_scalar = _to_array(a, "a")
    x_arr, x_scalar = _to_array(x, "x")
    _require_finite(a_arr, "a", a)
    if (a_arr <= 0).any():
        raise DomainError("Gamma shape a must be positive", parameter="a", value=a)
    if (x_arr < 0).any():
        raise DomainError("x must be non-negative", parameter="x", value=x)
    return a_arr, x_arr, a_scalar and x_scalar


def regularized_gamma_p(a: ArrayLike, x: ArrayLike) -> FloatOrArray:
    """Return the regularized lower incomplete gamma function P(a, x).

    Args:
        a: Shape, strictly positive.
        x: Argument, non-negative (``inf`` gives 1).

    Raises:
        `DomainError`: If ``a <= 0`` or ``x < 0``.

    """
    a_arr, x_arr, scalar = _validate_gamma_args(a, x)
    lower, _ = _gamma_pq(a_arr, x_arr)
    return _from_array(lower, scalar)


def regularized_gamma_q(a: ArrayLike, x: ArrayLike) -> FloatOrArray:
    """Return the regularized upper incomplete gamma function Q(a, x) = 1 - P."""
    a_arr, x_arr, scalar = _validate_gamma_args(a, x)
    _, upper = _gamma_pq(a_arr, x_arr)
    return _from_array(upper, scalar)


def _inverse_seed(
    a: NDArray[np.float64], p: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Return starting points for the gamma inversion.

    Wilson-Hilferty for ``a >= 1``; for small shapes the leading series term
    ``P(a, x) ~ x^a / Gamma(a + 1)`` on the lower part and an exponential tail
    on the upper part.
    """
    seed = np.empty_like(p)
    large = a >= 1.0
    if large.any():
        a_l = a[large]
        z = _normal_quantile(p[large])
        cube = 1.0 - 1.0 / (9.0 * a_l) + z / (3.0 * np.sqrt(a_l))
        wilson = a_l * cube**3
        seed[large] = np.where(wilson > 0, wilson, 1e-3 * a_l)
    small = ~large
    if small.any():
        a_s = a[small]
        p_s = p[small]
        t = 1.0 - a_s * (0.253 + a_s * 0.12)
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            body = (p_s / t) ** (1.0 / a_s)
            tail = 1.0 - np.log1p(-(p_s - t) / (1.0 - t))
        seed[small] = np.where(p_s < t, body, tail)
    return np.maximum(seed, np.finfo(np.float64).tiny)


def inverse_regularized_gamma_p(a: ArrayLike, p: ArrayLike) -> FloatOrArray:
    """Return x with P(a, x) = p, by safeguarded Halley iteration.

    The iterate is kept inside a bracket that shrinks with every evaluation;
    a step leaving the bracket is replaced by bisection (or doubling while the
    bracket is still unbounded above).

    Raises:
        `DomainError`: If ``a <= 0`` or ``p`` is not strictly inside (0, 1).

    """
    a_arr, a_scalar = _to_array(a, "a")
    p_arr, p_scalar = _to_array(p, "p")
    _require_finite(a_arr, "a", a)
    if (a_arr <= 0).any():
        raise DomainError("Gamma shape a must be positive", parameter="a", value=a)
    if ((p_arr <= 0) | (p_arr >= 1)).any():
        raise DomainError(
            "inverse_regularized_gamma_p requires 0 < p < 1; the inverse at 0 or 1 "
            "is not finite",
            parameter="p",
            value=p,
        )
    a_b, p_b = np.broadcast_arrays(a_arr, p_arr)
    result = _inverse_gamma(a_b.astype(np.float64), p_b.astype(np.float64))
    return _from_array(result, a_scalar and p_scalar)


def _inverse_gamma(a: FloatArray, p: FloatArray) -> FloatArray:
    a = a.ravel()
    p_flat = p.ravel()
    x = _inverse_seed(a, p_flat)
    lo = np.zeros_like(x)
    hi = np.full_like(x, np.inf)
    log_gamma_a = _log_gamma(a)
    active = np.ones(x.shape, dtype=bool)

    for step in range(MAX_INVERSION_STEPS):
        if not active.any():
            logger.debug("Gamma inversion converged in %d steps", step)
            break
        idx = np.flatnonzero(active)
        xa, aa, pa = x[idx], a[idx], p_flat[idx]
        lower, upper = _gamma_pq(aa, xa)
        # Compare on the smaller tail to keep precision near p = 1.
        err = np.where(pa > 0.5, (1.0 - pa) - upper, lower - pa)
        hi[idx] = np.where(err > 0, xa, hi[idx])
        lo[idx] = np.where(err <= 0, xa, lo[idx])

        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            density = np.exp((aa - 1.0) * np.log(xa) - xa - log_gamma_a[idx])
            u = err / density
            correction = np.minimum(1.0, u * ((aa - 1.0) / xa - 1.0))
            dx = u / (1.0 - 0.5 * correction)
        candidate = xa - dx
        outside = (
            ~np.isfinite(candidate)
            | (density == 0)
            | (candidate <= lo[idx])
            | (candidate >= hi[idx])
        )
        bisect = np.where(
            np.isfinite(hi[idx]), 0.5 * (lo[idx] + hi[idx]), 2.0 * np.maximum(xa, 1.0)
        )
        new_x = np.where(outside, bisect, candidate)
        done = (np.abs(new_x - xa) <= INVERSION_RTOL * np.abs(new_x)) | (err == 0)
        bounded = np.isfinite(hi[idx])
        done |= bounded & (hi[idx] - lo[idx] <= INVERSION_RTOL * hi[idx])
        x[idx] = new_x
        active[idx] = ~done
    else:
        logger.debug("Gamma inversion hit the step cap for %d values", active.sum())
    return x.reshape(p.shape)


def std_normal_pdf(x: ArrayLike) -> FloatOrArray:
    """Return the standard normal density ``exp(-x^2/2) / sqrt(2 pi)``."""
    array, scalar = _to_array(x, "x")
    _require_finite(array, "x", x)
    return _from_array(np.exp(-0.5 * array * array) / SQRT_2PI, scalar)


def std_normal_cdf(x: ArrayLike) -> FloatOrArray:
    """Return the standard normal distribution function, absolute error < 1e-12.

    Raises:
        `DomainError`: If ``x`` is not finite.

    """
    array, scalar = _to_array(x, "x")
    _require_finite(array, "x", x)
    return _from_array(_normal_cdf(array), scalar)


def _normal_cdf(x: NDArray[np.float64]) -> NDArray[np.float64]:
    _, upper = _gamma_pq(np.full_like(x, 0.5), 0.5 * x * x)
    half_tail = 0.5 * upper
    return np.where(x < 0, half_tail, 1.0 - half_tail)


def std_normal_quantile(u: ArrayLike) -> FloatOrArray:
    """Return the standard normal quantile, absolute error < 1e-9.

    Acklam's rational approximation followed by a single Halley step against
    `std_normal_cdf`.

    Raises:
        `DomainError`: If ``u`` is not strictly inside (0, 1).

    """
    array, scalar = _to_array(u, "u")
    if ((array <= 0) | (array >= 1)).any():
        raise DomainError(
            "std_normal_quantile requires 0 < u < 1; the quantile at 0 or 1 is "
            "infinite",
            parameter="u",
            value=u,
        )
    return _from_array(_normal_quantile(array), scalar)


def _polynomial(coefficients: tuple[float, ...], x: FloatArray) -> FloatArray:
    result = np.full_like(x, coefficients[0])
    for coefficient in coefficients[1:]:
        result = result * x + coefficient
    return result


def _normal_quantile(u: NDArray[np.float64]) -> NDArray[np.float64]:
    # Work on the lower tail only; 1 - u is exact for u >= 1/2.
    q = np.where(u < 0.5, u, 1.0 - u)
    z = np.empty_like(q)

    tail = q < _ACKLAM_P_LOW
    if tail.any():
        r = np.sqrt(-2.0 * np.log(q[tail]))
        z[tail] = _polynomial(_ACKLAM_C, r) / (_polynomial(_ACKLAM_D, r) * r + 1.0)
    central = ~tail
    if central.any():
        s = q[central] - 0.5
        r = s * s
        z[central] = (
            _polynomial(_ACKLAM_A, r) * s / (_polynomial(_ACKLAM_B, r) * r + 1.0)
        )

    # Halley polish against Phi(z) = Q(1/2, z^2/2) / 2, z <= 0.
    _, upper = _gamma_pq(np.full_like(z, 0.5), 0.5 * z * z)
    err = 0.5 * upper - q
    step = err * SQRT_2PI * np.exp(0.5 * z * z)
    z = z - step / (1.0 + 0.5 * z * step)
    return np.where(u < 0.5, z, -z) + 0.0


__all__ = [
    "FloatOrArray",
    "inverse_regularized_gamma_p",
    "log_gamma",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
]
