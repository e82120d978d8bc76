"""Estimation when claims below the deductible are never filed.

Observed claim counts are binomial thinnings of the accident counts, so
the recoverable risk variable is the rescaled ``(1 - H(dd2)) * theta``
rather than ``theta`` itself.  This module provides the survival-ratio
estimator linking the two deductibles, demixing of the rescaled risk, the
two point strategies for the sub-deductible damage mass plus its
nonparametric upper bound, and an executable observational-equivalence
construction showing why that mass is not identified from claims alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .demix import demix_poisson
from .dgp import DgpConfig, InsureeRecord, apply_truncation
from .errors import InconsistencyWarning, InsufficientDataError, InvalidArgumentError
from .kernel import silverman_bandwidth
from .legendre import LegendreDensity
from .moments import VARIANCE_FLOOR, MomentSet, factorial_moments


@dataclass(frozen=True)
class TruncatedSummary:
    """Ingredients of the truncated-data identification argument."""

    survival_ratio: float       # (1 - H(dd1)) / (1 - H(dd2)), from claims
    shares: tuple               # observed contract shares (nu_1, nu_2)
    mu_star_1: np.ndarray       # factorial moments of observed counts, contract 1
    mu_star_2: np.ndarray       # same, contract 2
    h2: float | None = None     # sub-deductible mass when a strategy pins it

    def __post_init__(self):
        if not (0.0 < self.survival_ratio < 1.0 + 1e-12):
            raise InvalidArgumentError(
                f"survival ratio must lie in (0, 1], got {self.survival_ratio}"
            )
        if abs(sum(self.shares) - 1.0) > 1e-9:
            raise InvalidArgumentError(f"contract shares {self.shares} must sum to 1")


def estimate_survival_ratio(contract2_claims, dd1: float) -> float:
    """Share of contract-2 claims at or above the higher deductible.

    Contract-2 claims are truncated at dd2, so this empirical survival at
    dd1 estimates (1 - H(dd1)) / (1 - H(dd2)).
    """
    claims = np.asarray(contract2_claims, dtype=float)
    if claims.size == 0:
        raise InsufficientDataError("no contract-2 claims")
    above = np.sum(claims >= dd1)
    if above == 0:
        raise InsufficientDataError(f"no contract-2 claims at or above dd1={dd1}")
    return float(above / claims.size)


def summarize_truncated(records, menu_rule, order: int) -> TruncatedSummary:
    """Assemble the truncated-data summary from a truncated dataset."""
    js1 = np.array([r.j for r in records if r.chi == 1], dtype=int)
    js2 = np.array([r.j for r in records if r.chi == 2], dtype=int)
    if js1.size == 0 or js2.size == 0:
        raise InsufficientDataError("both contracts need insurees")
    claims2 = np.array([d for r in records if r.chi == 2 for d in r.damages])
    ratio = estimate_survival_ratio(claims2, menu_rule.dd1)
    n = js1.size + js2.size
    return TruncatedSummary(
        survival_ratio=ratio,
        shares=(js1.size / n, js2.size / n),
        mu_star_1=factorial_moments(js1, order).values,
        mu_star_2=factorial_moments(js2, order).values,
    )


def demix_truncated(records, survival_ratio: float, order: int,
                    grid_size: int = 201) -> LegendreDensity:
    """Density of the rescaled risk ``(1 - H(dd2)) * theta`` on [0, 1].

    Contract-2 counts estimate its moments directly; contract-1 counts are
    thinned by the survival ratio on top of that and are rescaled back
    before the shares combine the two subsamples.
    """
    if not (0.0 < survival_ratio <= 1.0):
        raise InvalidArgumentError(f"survival ratio must lie in (0, 1], got {survival_ratio}")
    js1 = np.array([r.j for r in records if r.chi == 1], dtype=int)
    js2 = np.array([r.j for r in records if r.chi == 2], dtype=int)
    if js1.size == 0 or js2.size == 0:
        raise InsufficientDataError("both contracts need insurees")
    n = js1.size + js2.size
    nu1, nu2 = js1.size / n, js2.size / n
    m1 = factorial_moments(js1, order)
    m2 = factorial_moments(js2, order)
    powers = survival_ratio ** -np.arange(1.0, order + 1)
    values = nu1 * powers * m1.values + nu2 * m2.values
    variances = np.maximum(
        nu1**2 * powers**2 * m1.variances + nu2**2 * m2.variances, VARIANCE_FLOOR
    )
    combined = MomentSet(values=values, variances=variances, n=n)
    return demix_poisson(combined, support=(0.0, 1.0), grid_size=grid_size)


def subdeductible_mass_bound(contract2_claims, dd2: float, min_boundary_points: int = 10) -> float:
    """Upper bound on H(dd2) from the truncated density at the deductible.

    Valid when the damage density below the deductible does not exceed its
    boundary value; uses a reflection-corrected kernel estimate of the
    truncated density at dd2.
    """
    claims = np.asarray(contract2_claims, dtype=float)
    if claims.size == 0:
        raise InsufficientDataError("no contract-2 claims")
    bw = silverman_bandwidth(claims)
    near = np.sum(claims <= dd2 + 2 * bw)
    if near < min_boundary_points:
        raise InsufficientDataError(
            f"only {near} claims within two bandwidths of dd2={dd2}"
        )
    # Reflection at the truncation point doubles the boundary kernel mass.
    kernel_vals = np.exp(-0.5 * ((claims - dd2) / bw) ** 2)
    density = 2.0 * float(np.sum(kernel_vals)) / (claims.size * bw * math.sqrt(2 * math.pi))
    x = dd2 * density
    return x / (1.0 + x)


def subdeductible_mass_from_mean(mu_known: float, summary: TruncatedSummary,
                                 slack: float = 0.02) -> float:
    """H(dd2) when the unthinned mean accident rate is known externally."""
    if not (mu_known > 0):
        raise InvalidArgumentError(f"known mean must be positive, got {mu_known}")
    nu1, nu2 = summary.shares
    reported = nu1 * summary.mu_star_1[0] / summary.survival_ratio + nu2 * summary.mu_star_2[0]
    h2 = 1.0 - reported / mu_known
    if h2 < -slack or h2 >= 1.0 + slack:
        warnings.warn(
            f"implied sub-deductible mass {h2:.4f} falls outside [0, 1); "
            "the known mean and the claim data disagree",
            InconsistencyWarning,
            stacklevel=2,
        )
    return float(min(max(h2, 0.0), 1.0 - 1e-12))


# -- observational equivalence -------------------------------------------------


@dataclass(frozen=True)
class TransformedStructure:
    """Risk scaled up, damage survival scaled down: observationally
    equivalent to the base structure in everything the claims data show."""

    base: DgpConfig
    kappa: float

    def __post_init__(self):
        dd2 = self.base.menu_rule.dd2
        keep = float(self.base.damage.survival(dd2))
        if self.kappa < keep:
            raise InvalidArgumentError(
                f"kappa={self.kappa} below the survival floor {keep} at dd2={dd2}"
            )

    def simulate_truncated(self) -> list[InsureeRecord]:
        """Truncated dataset from the transformed structure, record-seeded
        exactly like the base simulator."""
        cfg = self.base
        rule = cfg.menu_rule
        kappa = self.kappa
        base_damage = cfg.damage
        keep = float(base_damage.survival(rule.dd2))
        filler_mass = 1.0 - keep / kappa

        from .dgp import _draw_raw

        theta, a, z, streams = _draw_raw(cfg, keep_streams=True)
        theta_tilde = kappa * theta
        # Frontier under the transformed damage law: survival above dd2 is
        # the base survival divided by kappa.
        denom = base_damage.ews_integral(a, rule.dd2, rule.dd1) / kappa
        t1 = rule.t1_intercept + rule.t1_slope * z
        chi = np.where(theta_tilde <= (rule.t2 - t1) / denom, 1, 2)

        records = []
        for i in range(cfg.n):
            stream = streams[i]
            j = int(stream.poisson(theta_tilde[i]))
            if j:
                u = stream.uniform(size=j)
                damages = np.where(
                    u < filler_mass,
                    rule.dd2 * u / max(filler_mass, 1e-300),
                    base_damage.ppf(1.0 - kappa * (1.0 - np.maximum(u, filler_mass))),
                )
                damages = tuple(float(d) for d in np.round(damages, 6))
            else:
                damages = ()
            records.append(
                InsureeRecord(
                    id=i, z=float(z[i]), chi=int(chi[i]), j=j, damages=damages,
                    theta_true=float(theta_tilde[i]), a_true=float(a[i]),
                )
            )
        return apply_truncation(records, rule)


def base_truncated(cfg: DgpConfig) -> list[InsureeRecord]:
    """Truncated dataset from the base structure (convenience wrapper)."""
    from .dgp import simulate_dataset

    return apply_truncation(simulate_dataset(cfg), cfg.menu_rule)


def write_summary(summary: TruncatedSummary, path):
    lines = [
        f"survival_ratio={summary.survival_ratio!r}",
        f"nu1={summary.shares[0]!r}",
        f"nu2={summary.shares[1]!r}",
        "mu_star_1=" + ";".join(repr(float(v)) for v in summary.mu_star_1),
        "mu_star_2=" + ";".join(repr(float(v)) for v in summary.mu_star_2),
        f"h2={'unknown' if summary.h2 is None else repr(summary.h2)}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
