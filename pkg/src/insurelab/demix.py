"""Nonnegativity-constrained GMM demixing of a Poisson mixture.

Matching the sample factorial moments of claim counts to the raw moments of
a Legendre-series density recovers the mixing (risk) density.  The moment
map is affine in the series coefficients, so the weighted GMM criterion is
a strictly convex quadratic, minimised exactly by an active-set QP under
density nonnegativity at a uniform grid of support points.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, NumericFailure
from .legendre import (
    LegendreDensity,
    basis_matrix,
    power_moment_matrix,
    series_negative_minima,
)
from .moments import MomentSet
from .qp import solve_qp_cg

NONNEG_SLACK = 1e-12


def solve_series_qp(P, q, G, h, A_eq, b_eq, x0_provider, order, kkt_tol=1e-10):
    """Constrained series fit with exact nonnegativity.

    Grid constraints alone let the polynomial dip slightly negative between
    grid points, which poisons downstream envelope constraints; after each
    solve every true dip location (from the derivative roots) is appended
    as an extra constraint until the series is nonnegative everywhere.
    """
    G_cur = np.asarray(G, dtype=float)
    h_cur = np.asarray(h, dtype=float)
    for _ in range(60):
        x0 = x0_provider(G_cur, h_cur)
        res = solve_qp_cg(P, q, G_cur, h_cur, A_eq, b_eq, x0=x0, kkt_tol=kkt_tol)
        dips = series_negative_minima(res.x, -NONNEG_SLACK)
        if not dips:
            return res
        rows = -basis_matrix(order, np.array([x for x, _ in dips]))
        G_cur = np.vstack([G_cur, rows])
        h_cur = np.append(h_cur, np.ones(len(dips)))
    raise NumericFailure("series fit kept dipping negative between grid points")


def demix_poisson(ms: MomentSet, support=(0.0, 1.0), grid_size: int = 201) -> LegendreDensity:
    """Fit ``1 + sum lam_m L_m`` on ``support`` to the moments in ``ms``.

    The support must sit inside [0, 1] after rescaling of the mixing
    variable; moments are supplied for the unscaled variable.
    """
    lo, hi = float(support[0]), float(support[1])
    if not (0.0 <= lo < hi <= 1.0):
        raise InvalidArgumentError(f"support {support} must be a subinterval of [0, 1]")
    if grid_size < 101:
        raise InvalidArgumentError(f"grid_size must be >= 101, got {grid_size}")
    order = ms.order

    b, A = moment_map(order, lo, hi)
    v_inv = 1.0 / ms.variances
    P = 2.0 * A.T @ (v_inv[:, None] * A)
    q = -2.0 * A.T @ (v_inv * (ms.values - b))

    # Density nonnegativity at grid points: -(L x) <= 1; the origin is
    # always strictly feasible.
    xs = np.linspace(0.0, 1.0, grid_size)
    L = basis_matrix(order, xs)
    result = solve_series_qp(
        P, q, -L, np.ones(grid_size), None, None,
        x0_provider=lambda G_cur, h_cur: np.zeros(order), order=order,
    )
    density = LegendreDensity(support=(lo, hi), coeffs=result.x, grid_size=grid_size)
    if density.min_on_grid() < -NONNEG_SLACK:
        raise InvalidArgumentError(
            f"fitted density dips to {density.min_on_grid():.3e} on its grid"
        )
    return density


def moment_map(order: int, lo: float, hi: float):
    """Affine map ``mu(lam) = b + A lam`` from series coefficients to raw
    moments of the variable on ``[lo, hi]`` (moments about the origin)."""
    from math import comb

    b_unit, A_unit = power_moment_matrix(order)
    width = hi - lo
    b = np.zeros(order)
    A = np.zeros((order, order))
    for m in range(1, order + 1):
        # theta^m = sum_j C(m, j) lo^(m-j) width^j x^j
        for j in range(m + 1):
            weight = comb(m, j) * lo ** (m - j) * width**j
            b[m - 1] += weight * (1.0 / (j + 1))
            if j >= 1:
                A[m - 1] += weight * A_unit[j - 1]
    return b, A


def gmm_objective(ms: MomentSet, density: LegendreDensity) -> float:
    """Weighted GMM criterion of ``density`` against the moments ``ms``."""
    lo, hi = density.support
    b, A = moment_map(density.order, lo, hi)
    resid = ms.values - (b + A @ density.coeffs)
    return float(np.sum(resid**2 / ms.variances))
