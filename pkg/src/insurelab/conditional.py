"""Estimation on the low-coverage subsample: damage cdf, plug-in frontier,
local factorial moments, and the constrained conditional-density fit.

The conditional density of risk among contract-1 buyers at instrument value
``z0`` has two segments.  Below the frontier evaluated at the top of the
aversion support every insuree buys contract 1, so the conditional density
is the marginal risk density divided by the choice share.  Beyond that
boundary the shape is a Legendre-series density fitted by weighted GMM to
kernel-localised factorial moments, under an envelope bound (conditional
mass cannot exceed marginal mass), continuity at the boundary, and a zero
endpoint at the zero-aversion frontier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .damage import DamageDist
from .demix import moment_map, solve_series_qp
from .dgp import LinearMenuRule
from .errors import (
    DegenerateRegionError,
    InsufficientDataError,
    NumericFailure,
)
from .kernel import KernelSpec, kernel_regress, local_weights
from .legendre import LegendreDensity, basis_matrix
from .model import frontier_risk
from .moments import VARIANCE_FLOOR, MomentSet
from .qp import feasible_point

MIN_LOCAL_SAMPLE = 50


@dataclass(frozen=True)
class SampleView:
    """Array view of a record list; build once, reuse across many fits."""

    z: np.ndarray
    j: np.ndarray
    chi: np.ndarray

    @staticmethod
    def from_records(records) -> "SampleView":
        return SampleView(
            z=np.array([r.z for r in records], dtype=float),
            j=np.array([r.j for r in records], dtype=float),
            chi=np.array([r.chi for r in records], dtype=int),
        )

    def subsample_choice1(self):
        mask = self.chi == 1
        return self.z[mask], self.j[mask]


def _as_view(records) -> SampleView:
    return records if isinstance(records, SampleView) else SampleView.from_records(records)


def estimate_damage_cdf(damages) -> DamageDist:
    """Pooled empirical damage distribution (the damage law is z-free)."""
    return DamageDist.empirical(damages)


def estimate_frontier(a, z: float, menu_rule: LinearMenuRule, damage_cdf: DamageDist):
    """Plug-in indifference frontier with the estimated damage cdf."""
    lo, hi = menu_rule.coverages(z)
    if np.ndim(a):
        return (hi.premium - lo.premium) / damage_cdf.ews_integral(
            np.asarray(a, dtype=float), hi.deductible, lo.deductible
        )
    return frontier_risk(float(a), lo, hi, damage_cdf)


def estimate_choice_share(records, z0: float, spec: KernelSpec = KernelSpec()) -> float:
    """Kernel-regressed probability of choosing contract 1 at ``z0``."""
    view = _as_view(records)
    return kernel_regress(view.z, (view.chi == 1).astype(float), z0, spec).value


def conditional_factorial_moments(
    records, z0: float, order: int, spec: KernelSpec = KernelSpec()
) -> MomentSet:
    """Kernel-localised factorial moments of claim counts among contract-1
    buyers near ``z0``, with kernel-weighted variance entries."""
    zs, js = _as_view(records).subsample_choice1()
    if zs.size == 0:
        raise InsufficientDataError("no contract-1 insurees in the sample")
    w, n_eff = local_weights(zs, z0, spec)
    if n_eff < MIN_LOCAL_SAMPLE:
        raise InsufficientDataError(
            f"effective local sample {n_eff:.1f} below {MIN_LOCAL_SAMPLE} at z0={z0}"
        )
    w_sum = w.sum()
    ff = np.ones_like(js)
    values, variances = [], []
    for m in range(1, order + 1):
        ff = ff * (js - (m - 1))
        mean = float(np.sum(w * ff) / w_sum)
        var = float(np.sum(w**2 * (ff - mean) ** 2) / w_sum**2)
        values.append(mean)
        variances.append(max(var, VARIANCE_FLOOR))
    return MomentSet(values=np.array(values), variances=np.array(variances), n=zs.size)


@dataclass(frozen=True)
class ConditionalFit:
    """Conditional-on-contract-1 risk density at one instrument value."""

    z0: float
    nu1: float
    boundary_lo: float          # frontier at the aversion cap
    boundary_hi: float          # min(frontier at zero aversion, 1)
    tail_weight: float          # conditional mass beyond boundary_lo
    tail_density: LegendreDensity
    risk_density: LegendreDensity
    theta_grid: np.ndarray
    density_values: np.ndarray  # f(theta | contract 1, z0) on theta_grid
    pr_values: np.ndarray       # P(contract 1 | theta, z0) on theta_grid
    clipped_points: int         # grid points where the probability ratio left [0, 1]
    constraints: tuple = ("envelope", "continuity", "endpoint_zero")

    def density_at(self, theta: float) -> float:
        if theta < 0 or theta > self.boundary_hi:
            return 0.0
        if theta <= self.boundary_lo:
            return float(self.risk_density.pdf(theta)) / self.nu1
        return self.tail_weight * float(self.tail_density.pdf(theta))

    def pr_at(self, theta: float) -> float:
        """Choice-1 probability: exactly 1 below the lower boundary, exactly
        0 above the upper, the clipped density ratio in between."""
        if theta <= self.boundary_lo:
            return 1.0
        if theta >= self.boundary_hi:
            return 0.0
        marginal = float(self.risk_density.pdf(theta))
        if marginal <= 0.0:
            return 1.0 if self.density_at(theta) > 0 else 0.0
        return float(np.clip(self.density_at(theta) * self.nu1 / marginal, 0.0, 1.0))


def estimate_conditional_density(
    records,
    z0: float,
    menu_rule: LinearMenuRule,
    damage_cdf: DamageDist,
    risk_density: LegendreDensity,
    nu1: float,
    *,
    a_max: float = 1e-3,
    order: int = 4,
    spec: KernelSpec = KernelSpec(),
    grid_size: int = 201,
) -> ConditionalFit:
    view = _as_view(records)
    boundary_lo = estimate_frontier(a_max, z0, menu_rule, damage_cdf)
    boundary_hi = min(estimate_frontier(0.0, z0, menu_rule, damage_cdf), 1.0)
    if boundary_lo >= boundary_hi:
        raise DegenerateRegionError(
            f"no estimable segment at z0={z0}: frontier collapses "
            f"({boundary_lo:.4f} >= {boundary_hi:.4f})"
        )
    local = conditional_factorial_moments(view, z0, order, spec)

    tail_weight = 1.0 - float(risk_density.cdf(boundary_lo)) / nu1
    if tail_weight <= 1e-8:
        raise NumericFailure(
            f"estimated conditional mass beyond the boundary is {tail_weight:.2e}; "
            "cannot calibrate the tail density"
        )

    # The conditional mass on the segment cannot exceed the marginal mass
    # there; shrink the plug-in weight when sampling noise contradicts that.
    segment_mass = (
        float(risk_density.cdf(boundary_hi)) - float(risk_density.cdf(boundary_lo))
    ) / nu1
    tail_weight = min(tail_weight, (1.0 - 1e-9) * max(segment_mass, 1e-8))

    below = np.array(
        [risk_density.power_moment(m, up_to=boundary_lo) / nu1 for m in range(1, order + 1)]
    )
    b_seg, B = moment_map(order, boundary_lo, boundary_hi)
    y = local.values - below - tail_weight * b_seg
    v_inv = 1.0 / local.variances
    P = 2.0 * tail_weight**2 * B.T @ (v_inv[:, None] * B)
    q = -2.0 * tail_weight * B.T @ (v_inv * y)

    width = boundary_hi - boundary_lo
    xs = np.linspace(0.0, 1.0, grid_size)
    L = basis_matrix(order, xs)
    # The demixed marginal is nonnegative everywhere (exact refinement), so
    # no flooring is needed; the 1e-9 matches the envelope post-check slack.
    marginal_here = np.asarray(risk_density.pdf(boundary_lo + width * xs)) + 1e-9
    envelope = width * marginal_here / (tail_weight * nu1) - 1.0
    beta, constraints = _fit_tail(P, q, L, envelope, grid_size)
    tail_density = LegendreDensity(
        support=(boundary_lo, boundary_hi), coeffs=beta, grid_size=grid_size
    )

    theta_grid = np.linspace(0.0, 1.0, grid_size)
    marginal = np.asarray(risk_density.pdf(theta_grid))
    tail_vals = tail_weight * np.asarray(tail_density.pdf(theta_grid))
    below_mask = theta_grid <= boundary_lo
    beyond_mask = theta_grid >= boundary_hi
    density_values = np.where(
        below_mask, marginal / nu1, np.where(beyond_mask, 0.0, tail_vals)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(marginal > 0, density_values * nu1 / marginal, np.nan)
    middle = ~below_mask & ~beyond_mask
    clipped = int(np.sum(middle & ((raw < 0) | (raw > 1))))
    pr_values = np.where(
        below_mask,
        1.0,
        np.where(
            beyond_mask,
            0.0,
            np.clip(np.where(np.isnan(raw), 1.0 * (density_values > 0), raw), 0.0, 1.0),
        ),
    )
    return ConditionalFit(
        z0=z0,
        nu1=nu1,
        boundary_lo=boundary_lo,
        boundary_hi=boundary_hi,
        tail_weight=tail_weight,
        tail_density=tail_density,
        risk_density=risk_density,
        theta_grid=theta_grid,
        density_values=density_values,
        pr_values=pr_values,
        clipped_points=clipped,
        constraints=constraints,
    )


def _fit_tail(P, q, L, envelope, grid_size):
    """Constrained GMM fit of the tail-density coefficients.

    Tried with the full constraint set first; the endpoint-zero and
    continuity refinements improve finite-sample behaviour but can make a
    squeezed envelope infeasible, in which case they are dropped in that
    order (the envelope bound itself always stays).
    """
    inner = slice(1, grid_size - 1)
    G = np.vstack([-L[inner], L[inner]])
    h = np.concatenate([np.ones(grid_size - 2), envelope[inner]])
    ladder = (
        ("envelope", "continuity", "endpoint_zero"),
        ("envelope", "continuity"),
        ("envelope",),
    )
    last_error = None
    for constraints in ladder:
        rows, rhs = [], []
        if "continuity" in constraints:
            rows.append(L[0])
            rhs.append(envelope[0])
        if "endpoint_zero" in constraints:
            rows.append(L[-1])
            rhs.append(-1.0)
        A_eq = np.vstack(rows) if rows else None
        b_eq = np.array(rhs) if rows else None
        G_full = G if rows else np.vstack([-L, L])
        h_full = h if rows else np.concatenate([np.ones(grid_size), envelope])
        try:
            beta = solve_series_qp(
                P, q, G_full, h_full, A_eq, b_eq,
                x0_provider=lambda Gc, hc: _initial_point(Gc, hc, A_eq, b_eq),
                order=P.shape[0],
            ).x
            return beta, constraints
        except NumericFailure as exc:
            last_error = exc
    raise NumericFailure(f"tail-density fit infeasible even without refinements: {last_error}")


def _initial_point(G, h, A_eq, b_eq):
    """Minimum-norm equality solution if it is inequality-feasible, else a
    max-slack linear program."""
    if A_eq is None:
        return feasible_point(G, h)
    x0, *_ = np.linalg.lstsq(A_eq, b_eq, rcond=None)
    if np.all(G @ x0 <= h - 1e-12):
        return x0
    return feasible_point(G, h, A_eq, b_eq)
