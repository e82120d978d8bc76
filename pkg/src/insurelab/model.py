"""Contract-choice mathematics for CARA utility with Poisson accident counts.

An insuree with risk ``theta`` (expected accidents per period) and CARA
coefficient ``a`` evaluates a coverage ``(premium t, deductible dd)``
through its certainty equivalent

    CE = w - t - theta * int_0^dd exp(a*D) * (1 - H(D)) dD,

where ``H`` is the damage distribution.  The integral form is used
throughout: it is exact as ``a -> 0`` and equals
``theta * (expected_loss_factor - 1) / a`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .damage import DamageDist
from .errors import InvalidArgumentError, InvalidMenuError


@dataclass(frozen=True)
class Coverage:
    """One insurance contract: fixed premium and per-accident deductible."""

    premium: float
    deductible: float

    def __post_init__(self):
        if not (math.isfinite(self.premium) and self.premium >= 0):
            raise InvalidArgumentError(f"premium must be finite and >= 0, got {self.premium}")
        if not (self.deductible >= 0):
            raise InvalidArgumentError(f"deductible must be >= 0, got {self.deductible}")


@dataclass(frozen=True)
class TypePair:
    """Latent insuree type: accident risk and CARA risk aversion."""

    risk: float
    risk_aversion: float

    def __post_init__(self):
        if not (math.isfinite(self.risk) and self.risk > 0):
            raise InvalidArgumentError(f"risk must be finite and > 0, got {self.risk}")
        if not (math.isfinite(self.risk_aversion) and self.risk_aversion > 0):
            raise InvalidArgumentError(
                f"risk aversion must be finite and > 0, got {self.risk_aversion}"
            )


@dataclass(frozen=True)
class ContractMenu:
    """Ordered list of coverages (index 1..C) plus the maximal damage."""

    coverages: tuple[Coverage, ...]
    damage_upper_bound: float

    def __post_init__(self):
        object.__setattr__(self, "coverages", tuple(self.coverages))
        if len(self.coverages) == 0:
            raise InvalidArgumentError("menu must contain at least one coverage")

    def __len__(self):
        return len(self.coverages)

    def rp_ordered(self) -> bool:
        """Revealed-preference ordering: premiums up, deductibles down."""
        covs = self.coverages
        if covs[0].premium <= 0 or covs[0].deductible >= self.damage_upper_bound:
            return False
        for lo, hi in zip(covs, covs[1:]):
            if not (lo.premium < hi.premium and lo.deductible > hi.deductible):
                return False
        return True


def no_insurance(damage_upper_bound: float) -> Coverage:
    """The outside option: zero premium, deductible at the maximal damage."""
    return Coverage(premium=0.0, deductible=damage_upper_bound)


def _check_scalar(name, value, minimum=None):
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    if minimum is not None and value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")


def expected_loss_factor(a: float, deductible: float, damage: DamageDist) -> float:
    """Expected utility-loss factor of one accident, E[exp(a*min(dd, D))].

    Equals ``1 + a * int_0^dd exp(a*D) (1-H(D)) dD``; it is 1 exactly when
    the deductible is zero and strictly larger otherwise.
    """
    _check_scalar("risk aversion", a, minimum=0.0)
    if a == 0.0:
        raise InvalidArgumentError("expected_loss_factor requires a > 0")
    _check_scalar("deductible", deductible, minimum=0.0)
    return 1.0 + a * damage.ews_integral(a, 0.0, deductible)


def certainty_equivalent(cov: Coverage, tp: TypePair, w: float, damage: DamageDist) -> float:
    """Certain wealth equivalent of holding ``cov`` for a ``tp`` insuree."""
    _check_scalar("wealth", w)
    loss = tp.risk * damage.ews_integral(tp.risk_aversion, 0.0, cov.deductible)
    return w - cov.premium - loss


def frontier_risk(a: float, lo: Coverage, hi: Coverage, damage: DamageDist) -> float:
    """Risk level indifferent between ``lo`` and ``hi`` at aversion ``a``.

    ``lo`` must be the cheaper/high-deductible coverage.  The locus is
    strictly decreasing in ``a``.
    """
    _check_scalar("risk aversion", a, minimum=0.0)
    if not (lo.premium < hi.premium and lo.deductible > hi.deductible):
        raise InvalidMenuError(
            "coverages are not revealed-preference ordered: "
            f"({lo.premium}, {lo.deductible}) vs ({hi.premium}, {hi.deductible})"
        )
    denom = damage.ews_integral(a, hi.deductible, lo.deductible)
    return (hi.premium - lo.premium) / denom


def frontier_risk_batch(a, lo: Coverage, hi: Coverage, damage: DamageDist):
    """Vectorised :func:`frontier_risk` over an array of aversion values."""
    if not (lo.premium < hi.premium and lo.deductible > hi.deductible):
        raise InvalidMenuError("coverages are not revealed-preference ordered")
    a = np.asarray(a, dtype=float)
    denom = damage.ews_integral(a, hi.deductible, lo.deductible)
    return (hi.premium - lo.premium) / denom


def frontier_risk_aversion(
    theta: float,
    lo: Coverage,
    hi: Coverage,
    damage: DamageDist,
    a_max: float,
    tol: float = 1e-12,
) -> float | None:
    """Inverse of the indifference locus: aversion at which the locus equals
    ``theta``, or ``None`` when ``theta`` falls outside its range on
    ``[0, a_max]``."""
    _check_scalar("risk", theta, minimum=0.0)
    if theta <= 0:
        raise InvalidArgumentError(f"risk must be > 0, got {theta}")
    top = frontier_risk(0.0, lo, hi, damage)
    if theta > top:
        return None
    bottom = frontier_risk(a_max, lo, hi, damage)
    if theta < bottom:
        return None
    a_lo, a_hi = 0.0, a_max
    while a_hi - a_lo > tol:
        mid = 0.5 * (a_lo + a_hi)
        if frontier_risk(mid, lo, hi, damage) >= theta:
            a_lo = mid
        else:
            a_hi = mid
    return 0.5 * (a_lo + a_hi)


def choose_contract(tp: TypePair, menu: ContractMenu, damage: DamageDist) -> int:
    """Index (1-based) of the certainty-equivalent maximising coverage.

    Ties break toward the lower index so the choice is deterministic.
    """
    best_idx, best_ce = 1, -math.inf
    for idx, cov in enumerate(menu.coverages, start=1):
        ce = certainty_equivalent(cov, tp, 0.0, damage)
        if ce > best_ce:
            best_idx, best_ce = idx, ce
    return best_idx


@dataclass(frozen=True)
class TripleCheck:
    """Both sides of the spacing inequalities for one adjacent triple."""

    premium_ratio: float        # (t_{c+2} - t_{c+1}) / (t_{c+1} - t_c)
    integral_ratio: float       # RHS of the spacing condition at a_lower
    ordering_ok: bool
    kappa: float                # ratio of mean survivals on the two deductible gaps
    slope_hi: float             # (t_{c+2} - t_{c+1}) / (dd_{c+1} - dd_{c+2})
    slope_lo_scaled: float      # kappa * (t_{c+1} - t_c) / (dd_c - dd_{c+1})
    convexity_ok: bool


@dataclass(frozen=True)
class MenuValidation:
    rp_ok: bool
    ordering_ok: bool
    convexity_ok: bool
    triples: tuple[TripleCheck, ...]

    @property
    def passed(self) -> bool:
        return self.rp_ok and self.ordering_ok and self.convexity_ok


def validate_menu(menu: ContractMenu, damage: DamageDist, a_lower: float) -> MenuValidation:
    """Check the three menu conditions: revealed-preference ordering,
    frontier non-crossing (premium-gap vs survival-integral ratios at the
    lowest aversion), and convexity of the premium-deductible schedule."""
    if len(menu) < 2:
        raise InvalidArgumentError("menu validation needs at least two coverages")
    _check_scalar("a_lower", a_lower, minimum=0.0)
    rp_ok = menu.rp_ordered()

    triples = []
    covs = menu.coverages
    for c in range(len(covs) - 2):
        c0, c1, c2 = covs[c], covs[c + 1], covs[c + 2]
        gap_lo = c1.premium - c0.premium
        gap_hi = c2.premium - c1.premium
        premium_ratio = gap_hi / gap_lo
        num = damage.ews_integral(a_lower, c2.deductible, c1.deductible)
        den = damage.ews_integral(a_lower, c1.deductible, c0.deductible)
        integral_ratio = num / den
        ordering_ok = premium_ratio > integral_ratio

        # Mean-value construction: kappa is the ratio of average survival on
        # the lower deductible gap to that on the upper one, so kappa > 1.
        mean_surv_hi = damage.ews_integral(0.0, c2.deductible, c1.deductible) / (
            c1.deductible - c2.deductible
        )
        mean_surv_lo = damage.ews_integral(0.0, c1.deductible, c0.deductible) / (
            c0.deductible - c1.deductible
        )
        kappa = mean_surv_hi / mean_surv_lo
        slope_hi = gap_hi / (c1.deductible - c2.deductible)
        slope_lo_scaled = kappa * gap_lo / (c0.deductible - c1.deductible)
        triples.append(
            TripleCheck(
                premium_ratio=premium_ratio,
                integral_ratio=integral_ratio,
                ordering_ok=ordering_ok,
                kappa=kappa,
                slope_hi=slope_hi,
                slope_lo_scaled=slope_lo_scaled,
                convexity_ok=slope_hi > slope_lo_scaled,
            )
        )
    ordering_ok = all(t.ordering_ok for t in triples)
    convexity_ok = all(t.convexity_ok for t in triples)
    return MenuValidation(
        rp_ok=rp_ok,
        ordering_ok=ordering_ok,
        convexity_ok=convexity_ok,
        triples=tuple(triples),
    )


def health_certainty_equivalent(
    t: float,
    dd: float,
    copay: float,
    tp: TypePair,
    w: float,
    damage: DamageDist,
    n_sims: int,
    seed: int,
) -> float:
    """Certainty equivalent of a health contract (premium, period deductible,
    per-visit copayment) by Monte Carlo.

    Out-of-pocket spending is the visit-expense total while it stays below
    the deductible; once the running total crosses it, the insuree owes the
    deductible plus the copayment for every later visit.  The utility-loss
    factor is estimated as the sample mean of ``exp(a * Y)``.
    """
    if n_sims < 10_000:
        raise InvalidArgumentError(f"n_sims must be at least 10000, got {n_sims}")
    _check_scalar("copay", copay, minimum=0.0)
    _check_scalar("premium", t, minimum=0.0)
    _check_scalar("wealth", w)
    if not (dd >= 0):
        raise InvalidArgumentError(f"deductible must be >= 0, got {dd}")

    rng = np.random.default_rng(seed)
    visits = rng.poisson(tp.risk, size=n_sims)
    total_visits = int(visits.sum())
    expenses = damage.draw(rng, size=total_visits)

    starts = np.concatenate(([0], np.cumsum(visits)))[:-1]
    totals = np.add.reduceat(np.concatenate((expenses, [0.0])), np.concatenate((starts, [total_visits])))[:-1]
    totals[visits == 0] = 0.0

    out_of_pocket = totals.copy()
    over = totals > dd
    if np.any(over) and math.isfinite(dd):
        cum = np.cumsum(expenses)
        offsets = np.where(starts > 0, cum[starts - 1], 0.0)
        within = cum - np.repeat(offsets, visits)
        crossed = within > dd
        visit_pos = np.arange(total_visits) - np.repeat(starts, visits)
        big = total_visits + 1
        first_cross = np.minimum.reduceat(
            np.concatenate((np.where(crossed, visit_pos, big), [big])),
            np.concatenate((starts, [total_visits])),
        )[:-1]
        met_at = first_cross + 1.0          # visit count at which deductible is met
        out_of_pocket[over] = dd + (visits[over] - met_at[over]) * copay
    a = tp.risk_aversion
    loss_factor = float(np.mean(np.exp(a * out_of_pocket)))
    return w - t - math.log(loss_factor) / a
