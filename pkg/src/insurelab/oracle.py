"""Independent brute-force references for the test suite and the CLI.

Everything here is deliberately redundant with the production estimators:
closed-form integrals instead of quadrature, analytic copula conditionals
instead of fitted densities, and large-sample simulation as a second route
wherever a formula exists.  Disagreement between routes fails the build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc, betaincinv, ndtr, ndtri
from scipy.stats import beta as beta_dist

from .damage import DamageDist
from .dgp import DgpConfig
from .errors import InvalidArgumentError
from .quadrature import adaptive_simpson


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    value: float
    method: str
    error: float

    def __post_init__(self):
        if not (self.error > 0):
            raise InvalidArgumentError("every oracle value must carry a positive error bound")


def quad_simpson(f, a: float, b: float, tol: float = 1e-10):
    """Adaptive-Simpson integral with its error estimate."""
    return adaptive_simpson(f, a, b, tol)


# -- closed forms ------------------------------------------------------------


def ews_closed_form(damage: DamageDist, a: float, lo: float, hi: float) -> float:
    """Closed-form int_lo^hi e^{aD}(1-H(D)) dD for the analytic kinds."""
    if damage.kind == "exponential":
        k = a - 1.0 / damage.mean
        if abs(k) < 1e-15:
            return hi - lo
        return (math.exp(k * hi) - math.exp(k * lo)) / k
    if damage.kind == "uniform":
        ub = damage.upper
        hi = min(hi, ub)
        if hi <= lo:
            return 0.0
        if a == 0.0:
            return (hi - lo) - (hi * hi - lo * lo) / (2.0 * ub)
        e_hi, e_lo = math.exp(a * hi), math.exp(a * lo)
        plain = (e_hi - e_lo) / a
        weighted = (e_hi * (a * hi - 1.0) - e_lo * (a * lo - 1.0)) / (a * a)
        return plain - weighted / ub
    raise InvalidArgumentError("closed forms exist only for analytic damage kinds")


def dews_closed_form(damage: DamageDist, a: float, lo: float, hi: float) -> float:
    """Closed-form int_lo^hi D e^{aD}(1-H(D)) dD for the exponential kind."""
    if damage.kind != "exponential":
        raise InvalidArgumentError("D-weighted closed form implemented for exponential only")
    k = a - 1.0 / damage.mean
    if abs(k) < 1e-15:
        return (hi * hi - lo * lo) / 2.0
    anti = lambda d: math.exp(k * d) * (k * d - 1.0) / (k * k)
    return anti(hi) - anti(lo)


# -- analytic copula conditionals -------------------------------------------


def _type_cdfs(cfg: DgpConfig):
    f_theta = lambda t: betainc(cfg.theta_alpha, cfg.theta_beta, np.clip(t, 0.0, 1.0))
    f_a = lambda a: betainc(cfg.a_alpha, cfg.a_beta, np.clip(a / cfg.a_scale, 0.0, 1.0))
    return f_theta, f_a


def true_theta_density(theta, cfg: DgpConfig):
    return beta_dist.pdf(theta, cfg.theta_alpha, cfg.theta_beta)


def true_conditional_density(theta_star: float, a, cfg: DgpConfig):
    """Density of risk aversion given risk, from the Gaussian copula."""
    f_theta, f_a = _type_cdfs(cfg)
    rho = cfg.copula_rho
    s = math.sqrt(1.0 - rho * rho)
    a_arr = np.asarray(a, dtype=float)
    inside = (a_arr > 0.0) & (a_arr < cfg.a_scale)
    a_safe = np.where(inside, a_arr, 0.5 * cfg.a_scale)
    x = ndtri(f_theta(theta_star))
    y = ndtri(f_a(a_safe))
    marginal = beta_dist.pdf(a_safe / cfg.a_scale, cfg.a_alpha, cfg.a_beta) / cfg.a_scale
    phi = lambda t: np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    out = np.where(inside, marginal * phi((y - rho * x) / s) / (s * phi(y)), 0.0)
    return out if out.ndim else float(out)


def true_conditional_cdf(theta_star: float, a, cfg: DgpConfig):
    """P(risk aversion <= a | risk), from the Gaussian copula."""
    f_theta, f_a = _type_cdfs(cfg)
    rho = cfg.copula_rho
    s = math.sqrt(1.0 - rho * rho)
    a_arr = np.asarray(a, dtype=float)
    x = ndtri(f_theta(theta_star))
    u = f_a(np.clip(a_arr, 0.0, cfg.a_scale))
    out = np.where(
        u <= 0.0, 0.0, np.where(u >= 1.0, 1.0, ndtr((ndtri(np.clip(u, 1e-320, 1.0)) - rho * x) / s))
    )
    return out if out.ndim else float(out)


# -- frontier oracle ---------------------------------------------------------


def oracle_frontier(a: float, z: float, cfg: DgpConfig) -> float:
    rule = cfg.menu_rule
    t1 = rule.t1_intercept + rule.t1_slope * z
    return (rule.t2 - t1) / ews_closed_form(cfg.damage, a, rule.dd2, rule.dd1)


def oracle_frontier_inverse(theta: float, z: float, cfg: DgpConfig) -> float | None:
    """Aversion where the frontier passes through ``theta``; None if the
    frontier lies below ``theta`` even at zero aversion."""
    if theta > oracle_frontier(0.0, z, cfg):
        return None
    f = lambda a: oracle_frontier(a, z, cfg) - theta
    hi = cfg.a_scale
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1.0:
            raise InvalidArgumentError("frontier inversion ran away")
    return brentq(f, 0.0, hi, xtol=1e-18)


def identified_range_oracle(theta_star: float, cfg: DgpConfig) -> tuple[float, float]:
    """Image of the frontier inverse over the instrument range, clipped to
    the aversion support."""
    a_at = lambda z: oracle_frontier_inverse(theta_star, z, cfg)
    lo_val = a_at(cfg.z_hi)
    a_min = 0.0 if lo_val is None else min(lo_val, cfg.a_scale)
    hi_val = a_at(cfg.z_lo)
    a_max = 0.0 if hi_val is None else min(hi_val, cfg.a_scale)
    return a_min, a_max


# -- choice probabilities -----------------------------------------------------


@dataclass(frozen=True)
class ChoiceProbOracle:
    simulated: float
    analytic: float
    n_sims: int
    seed: int


def brute_choice_prob(theta: float, z: float, cfg: DgpConfig, n_sims: int, seed: int):
    """P(contract 1 | theta, z) by simulation and by the analytic cdf."""
    if n_sims < 10**6:
        raise InvalidArgumentError(f"n_sims must be at least 1e6, got {n_sims}")
    a_star = oracle_frontier_inverse(theta, z, cfg)
    if a_star is None:
        return ChoiceProbOracle(0.0, 0.0, n_sims, seed)
    if a_star >= cfg.a_scale:
        return ChoiceProbOracle(1.0, 1.0, n_sims, seed)
    analytic = true_conditional_cdf(theta, a_star, cfg)

    f_theta, _ = _type_cdfs(cfg)
    rho = cfg.copula_rho
    x = ndtri(f_theta(theta))
    rng = np.random.default_rng(seed)
    y = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(n_sims)
    a_draws = cfg.a_scale * betaincinv(cfg.a_alpha, cfg.a_beta, ndtr(y))
    simulated = float(np.mean(a_draws <= a_star))
    return ChoiceProbOracle(simulated, analytic, n_sims, seed)


def choice_share_at(z: float, cfg: DgpConfig) -> float:
    """P(contract 1 | Z = z) by quadrature over the risk marginal."""
    nodes, weights = np.polynomial.legendre.leggauss(96)
    t_nodes = (nodes + 1) / 2
    t_weights = weights / 2.0
    dens = true_theta_density(t_nodes, cfg)
    a_stars = [oracle_frontier_inverse(t, z, cfg) for t in t_nodes]
    pr = np.array(
        [
            0.0
            if s is None
            else (1.0 if s >= cfg.a_scale else true_conditional_cdf(t, s, cfg))
            for t, s in zip(t_nodes, a_stars)
        ]
    )
    return float(np.sum(t_weights * dens * pr))


def marginal_choice_share(cfg: DgpConfig) -> float:
    """Unconditional P(contract 1) by nested Gauss-Legendre quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(96)
    z_nodes = cfg.z_lo + (cfg.z_hi - cfg.z_lo) * (nodes + 1) / 2
    z_weights = weights / 2.0
    return float(np.sum(z_weights * np.array([choice_share_at(z, cfg) for z in z_nodes])))


# -- report table -------------------------------------------------------------


def standard_reports(cfg: DgpConfig | None = None) -> list[OracleReport]:
    """The fixed table of anchor quantities the CLI prints."""
    cfg = cfg if cfg is not None else DgpConfig(n=1, seed=0)
    uniform = DamageDist.uniform(1e4)
    out = []

    val, err = quad_simpson(lambda d: math.exp(5e-4 * d) * (1 - d / 1e4), 500.0, 1000.0)
    out.append(OracleReport("frontier_anchor_integral", val, "quadrature", max(err, 1e-9)))
    out.append(
        OracleReport(
            "frontier_at_5e-4", 250.0 / val, "quadrature", max(err / val, 1e-12)
        )
    )
    val2, err2 = quad_simpson(lambda d: math.exp(1e-4 * d) * (1 - d / 1e4), 0.0, 1000.0)
    out.append(OracleReport("exclusion_anchor_integral", val2, "quadrature", max(err2, 1e-9)))
    excl, err3 = quad_simpson(lambda d: math.exp(1e-4 * d) * (1 - d / 1e4), 1000.0, 1e4)
    out.append(
        OracleReport("exclusion_premium_at_0.1", 0.1 * excl, "quadrature", max(err3, 1e-9))
    )
    closed = ews_closed_form(uniform, 5e-4, 500.0, 1000.0)
    out.append(OracleReport("frontier_anchor_closed_form", closed, "closed-form", 1e-12))

    share = marginal_choice_share(cfg)
    out.append(OracleReport("choice1_share", share, "quadrature", 1e-6))
    for theta_star in (0.4, 0.6):
        a_min, a_max = identified_range_oracle(theta_star, cfg)
        out.append(
            OracleReport(f"identified_a_max_theta{theta_star}", a_max, "closed-form", 1e-12)
        )
    return out


def format_reports(reports) -> str:
    width = max(len(r.quantity) for r in reports)
    lines = [f"{'quantity'.ljust(width)}  {'value':>18}  {'error':>10}  method"]
    for r in reports:
        lines.append(f"{r.quantity.ljust(width)}  {r.value:>18.10g}  {r.error:>10.2e}  {r.method}")
    return "\n".join(lines)
