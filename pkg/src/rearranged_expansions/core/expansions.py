"""Evaluate Edgeworth and Cornish-Fisher expansions for standardized means.

Both expansions are truncated after ``order`` terms, the j-th term carrying
the factor ``n^{-(j-1)/2}``. Nothing here clips or repairs the result: the
Edgeworth value may leave [0, 1] and either curve may be non-monotone.
Monotone repair is the job of `rearranged_expansions.core.rearrangement`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..constants import MAX_EXPANSION_ORDER
from ..exceptions import DomainError
from .distributions import Cumulants
from .special_functions import (
    FloatOrArray,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)

_TERMS = range(1, MAX_EXPANSION_ORDER + 1)


def _check_term(j: int) -> None:
    if isinstance(j, bool) or j not in _TERMS:
        raise DomainError(
            f"Expansion term must be one of {list(_TERMS)}", parameter="j", value=j
        )


@dataclass(frozen=True)
class ExpansionSpec:
    """Define which expansion to evaluate: cumulants, sample size and order."""

    cumulants: Cumulants
    sample_size: int
    order: int

    def __post_init__(self) -> None:
        """Validate the order and the sample size."""
        if isinstance(self.order, bool) or self.order not in _TERMS:
            raise DomainError(
                f"Expansion order must be one of {list(_TERMS)}",
                parameter="order",
                value=self.order,
            )
        if isinstance(self.sample_size, bool) or self.sample_size < 1:
            raise DomainError(
                "sample_size must be at least 1",
                parameter="sample_size",
                value=self.sample_size,
            )

    def term_weight(self, j: int) -> float:
        """Return ``n^{-(j-1)/2}``."""
        return float(self.sample_size) ** (-(j - 1) / 2.0)


def cf_polynomial(j: int, z: ArrayLike, c: Cumulants) -> FloatOrArray:
    """Return the Cornish-Fisher polynomial R_j at ``z``.

    R_1(z) = z, R_2(z) = lambda (z^2 - 1) / 6 and
    R_3(z) = (3 kappa (z^3 - 3z) - 2 lambda^2 (2 z^3 - 5 z)) / 72.
    """
    _check_term(j)
    zz = np.asarray(z, dtype=np.float64)
    lam, kappa = c.skewness, c.excess_kurtosis
    if j == 1:
        value = zz.copy()
    elif j == 2:
        value = lam * (zz * zz - 1.0) / 6.0
    else:
        z3 = zz**3
        kurtosis_part = 3.0 * kappa * (z3 - 3.0 * zz)
        value = (kurtosis_part - 2.0 * lam**2 * (2.0 * z3 - 5.0 * zz)) / 72.0
    return float(value) if value.ndim == 0 else value


def edgeworth_polynomial(j: int, x: ArrayLike, c: Cumulants) -> FloatOrArray:
    """Return the Edgeworth term P_j at ``x``.

    P_1 = Phi, P_2(x) = -lambda (x^2 - 1) phi(x) / 6 and
    P_3(x) = -(3 kappa (x^3 - 3x) + lambda^2 (x^5 - 10 x^3 + 15 x)) phi(x) / 72.
    """
    _check_term(j)
    xx = np.asarray(x, dtype=np.float64)
    lam, kappa = c.skewness, c.excess_kurtosis
    if j == 1:
        value = np.asarray(std_normal_cdf(xx), dtype=np.float64)
    else:
        density = np.asarray(std_normal_pdf(xx), dtype=np.float64)
        if j == 2:
            value = -lam * (xx * xx - 1.0) * density / 6.0
        else:
            x3 = xx**3
            hermite_5 = xx**5 - 10.0 * x3 + 15.0 * xx
            polynomial = 3.0 * kappa * (x3 - 3.0 * xx) + lam**2 * hermite_5
            value = -polynomial * density / 72.0
    return float(value) if value.ndim == 0 else value


def edgeworth_cdf(spec: ExpansionSpec, x: ArrayLike) -> FloatOrArray:
    """Return the order-J Edgeworth approximation to F_n at ``x``, unclipped."""
    xx = np.asarray(x, dtype=np.float64)
    if not np.isfinite(xx).all():
        raise DomainError("x must be finite", parameter="x", value=x)
    total = np.zeros_like(xx)
    for j in range(1, spec.order + 1):
        term = np.asarray(edgeworth_polynomial(j, xx, spec.cumulants))
        total = total + term * spec.term_weight(j)
    return float(total) if total.ndim == 0 else total


def cornish_fisher_quantile(spec: ExpansionSpec, u: ArrayLike) -> FloatOrArray:
    """Return the order-J Cornish-Fisher approximation to Q_n at ``u``.

    Raises:
        `DomainError`: If ``u`` is not strictly inside (0, 1).

    """
    z = np.asarray(std_normal_quantile(u), dtype=np.float64)
    total = np.zeros_like(z)
    for j in range(1, spec.order + 1):
        term = np.asarray(cf_polynomial(j, z, spec.cumulants))
        total = total + term * spec.term_weight(j)
    return float(total) if total.ndim == 0 else total


__all__ = [
    "ExpansionSpec",
    "cf_polynomial",
    "cornish_fisher_quantile",
    "edgeworth_cdf",
    "edgeworth_polynomial",
]
