"""Conditional risk-aversion density via instrument variation.

At a fixed risk level, the frontier inverse maps instrument values to
aversion levels; differencing the choice probability along the instrument
and rescaling by the frontier slopes turns that variation into the
conditional density:

    f(a | theta) = -(d theta/d a) / (d theta/d z) * d P(contract 1)/d z,

evaluated at the instrument value where the frontier passes through
``(theta, a)``.  The estimator takes the absolute value and, when the
identified range covers the whole aversion support, normalises by its
integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInstrumentError, DegenerateRegionError

_BISECT_STEPS = 80


@dataclass(frozen=True)
class AversionDensityResult:
    theta_star: float
    a_grid: np.ndarray
    values: np.ndarray  # NaN outside the identified range
    a_min: float
    a_max: float
    normalized: bool

    @property
    def identified(self) -> np.ndarray:
        return ~np.isnan(self.values)


def _invert_in_z(frontier_fn, theta_star, a, z_lo, z_hi):
    """z with frontier(a, z) = theta_star; the frontier falls in z."""
    f_lo = frontier_fn(a, z_lo)
    f_hi = frontier_fn(a, z_hi)
    if theta_star > f_lo or theta_star < f_hi:
        return None
    lo, hi = z_lo, z_hi
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if frontier_fn(a, mid) >= theta_star:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _invert_in_a(frontier_fn, theta_star, z, a_cap):
    """a with frontier(a, z) = theta_star on [0, a_cap], clamped at the ends;
    the frontier falls in a."""
    if frontier_fn(0.0, z) < theta_star:
        return 0.0
    if frontier_fn(a_cap, z) > theta_star:
        return a_cap
    lo, hi = 0.0, a_cap
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if frontier_fn(mid, z) >= theta_star:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def identified_range(frontier_fn, theta_star, z_range, a_support_max):
    """Image of the frontier inverse over the instrument range: the aversion
    interval on which the conditional density is recoverable."""
    z_lo, z_hi = z_range
    a_max = _invert_in_a(frontier_fn, theta_star, z_lo, a_support_max)
    a_min = _invert_in_a(frontier_fn, theta_star, z_hi, a_support_max)
    if a_max <= a_min:
        raise DegenerateRegionError(
            f"identified range is empty at theta={theta_star}: [{a_min}, {a_max}]"
        )
    return a_min, a_max


def aversion_density(
    theta_star: float,
    frontier_fn,
    dfrontier_da_fn,
    pr_fn,
    *,
    a_grid,
    z_range,
    h_z: float,
    a_support_max: float,
) -> AversionDensityResult:
    """Evaluate the density formula over ``a_grid``; see module docstring.

    ``frontier_fn(a, z)`` and ``dfrontier_da_fn(a, z)`` may be estimated or
    oracle maps; ``pr_fn(theta, z)`` is the choice-1 probability.  Both
    instrument derivatives use a central difference with step ``h_z``,
    clipped into the instrument range near its ends.
    """
    if h_z <= 0:
        raise DegenerateInstrumentError(f"h_z must be positive, got {h_z}")
    z_lo, z_hi = z_range
    a_grid = np.asarray(a_grid, dtype=float)
    values = np.full(a_grid.size, np.nan)
    for idx, a in enumerate(a_grid):
        z_star = _invert_in_z(frontier_fn, theta_star, a, z_lo, z_hi)
        if z_star is None:
            continue
        zp, zm = min(z_star + h_z, z_hi), max(z_star - h_z, z_lo)
        dtheta_dz = (frontier_fn(a, zp) - frontier_fn(a, zm)) / (zp - zm)
        if abs(dtheta_dz) < 1e-14:
            raise DegenerateInstrumentError(
                f"frontier is flat in the instrument at a={a}, z={z_star}"
            )
        dtheta_da = dfrontier_da_fn(a, z_star)
        dpr_dz = (pr_fn(theta_star, zp) - pr_fn(theta_star, zm)) / (zp - zm)
        values[idx] = abs(-dtheta_da / dtheta_dz * dpr_dz)

    a_min, a_max = identified_range(frontier_fn, theta_star, z_range, a_support_max)
    full = a_min <= 1e-12 * a_support_max and a_max >= a_support_max * (1.0 - 1e-9)
    if full:
        mask = ~np.isnan(values)
        total = np.trapezoid(values[mask], a_grid[mask])
        if total > 0:
            values = values / total
    return AversionDensityResult(
        theta_star=theta_star,
        a_grid=a_grid,
        values=values,
        a_min=a_min,
        a_max=a_max,
        normalized=full,
    )
