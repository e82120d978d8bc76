"""Factorial moments of claim counts and the moment-order rule.

For a Poisson count with mean ``theta`` the m-th falling factorial moment
``E[J(J-1)...(J-m+1)]`` equals ``theta^m``, so the sample factorial moments
of claim counts estimate the raw moments of the mixing risk distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class MomentSet:
    """Estimated raw moments of the mixing variable plus their variances."""

    values: np.ndarray
    variances: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "variances", np.asarray(self.variances, dtype=float))
        if self.values.size < 1:
            raise InvalidArgumentError("a MomentSet needs at least one moment")
        if np.any(self.variances <= 0):
            raise InvalidArgumentError("moment variances must be positive")

    @property
    def order(self) -> int:
        return self.values.size


def factorial_moments(js, order: int) -> MomentSet:
    """Sample falling-factorial moments of counts up to ``order``.

    Variance entries follow the plug-in formula
    ``mean(ff^2)/N - mean(ff)^2/N`` (floored away from zero so the GMM
    weighting matrix stays invertible).
    """
    if order < 1:
        raise InvalidArgumentError(f"moment order must be >= 1, got {order}")
    counts = np.asarray(js, dtype=float)
    if counts.size == 0:
        raise InvalidArgumentError("empty count sample")
    n = counts.size
    ff = np.ones_like(counts)
    values, variances = [], []
    for m in range(1, order + 1):
        ff = ff * (counts - (m - 1))
        mean = float(ff.mean())
        values.append(mean)
        variances.append(max(float((ff**2).mean() / n - mean**2 / n), VARIANCE_FLOOR))
    return MomentSet(values=np.array(values), variances=np.array(variances), n=n)


def moment_order_rule(n: int) -> int:
    """Number of moments to match at sample size ``n``: floor(ln n / ln ln n)."""
    if n < 16:
        raise InvalidArgumentError(f"sample size must be at least 16, got {n}")
    return int(math.floor(math.log(n) / math.log(math.log(n))))
