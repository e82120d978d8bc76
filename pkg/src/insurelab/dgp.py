"""Synthetic insurance data: Gaussian-copula types, contract assignment by
the indifference frontier, Poisson claim counts, and damage draws.

Every insuree gets an independent random substream derived from the master
seed and the record id, so a dataset is reproducible bit for bit no matter
how records are evaluated or distributed across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import betaincinv, ndtr

from .damage import DamageDist
from .errors import InvalidArgumentError, InvalidMenuError
from .model import ContractMenu, Coverage

DAMAGE_DECIMALS = 6


@dataclass(frozen=True)
class LinearMenuRule:
    """Two-coverage menu whose first premium is linear in the instrument."""

    t1_slope: float = 3.25
    t1_intercept: float = 0.0
    dd1: float = 1000.0
    t2: float = 700.0
    dd2: float = 500.0

    def menu(self, z: float, damage_upper_bound: float = math.inf) -> ContractMenu:
        return ContractMenu(
            (
                Coverage(self.t1_intercept + self.t1_slope * z, self.dd1),
                Coverage(self.t2, self.dd2),
            ),
            damage_upper_bound,
        )

    def coverages(self, z: float) -> tuple[Coverage, Coverage]:
        m = self.menu(z)
        return m.coverages[0], m.coverages[1]

    def deductible(self, z: float, contract_index: int) -> float:
        return (self.dd1, self.dd2)[contract_index - 1]


@dataclass(frozen=True)
class DgpConfig:
    """Monte Carlo design: type marginals, copula, instrument, menu, damage."""

    n: int = 100_000
    theta_alpha: float = 2.0
    theta_beta: float = 3.0
    a_alpha: float = 1.0
    a_beta: float = 3.0
    a_scale: float = 1e-3
    copula_rho: float = -0.5
    damage: DamageDist = field(default_factory=lambda: DamageDist.exponential(5000.0))
    z_lo: float = 100.0
    z_hi: float = 200.0
    menu_rule: LinearMenuRule = field(default_factory=LinearMenuRule)
    seed: int = 0
    theta_fixed: float | None = None  # test hook: degenerate risk marginal

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}")
        if not (-1.0 < self.copula_rho < 1.0):
            raise InvalidArgumentError(f"copula_rho must lie in (-1, 1), got {self.copula_rho}")
        if not (self.z_lo < self.z_hi):
            raise InvalidArgumentError(f"need z_lo < z_hi, got [{self.z_lo}, {self.z_hi}]")
        for z in (self.z_lo, self.z_hi):
            lo, hi = self.menu_rule.coverages(z)
            if not (0 < lo.premium < hi.premium and lo.deductible > hi.deductible):
                raise InvalidMenuError(f"menu rule is not RP-valid at z={z}")

    def with_seed(self, seed: int) -> "DgpConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class InsureeRecord:
    """One simulated insuree; latent types ride along for oracle scoring only."""

    id: int
    z: float
    chi: int
    j: int
    damages: tuple[float, ...]
    theta_true: float | None = None
    a_true: float | None = None


def _record_stream(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=path))


def _draw_raw(cfg: DgpConfig, keep_streams: bool = False):
    """Per-record normals and uniforms, then vectorised marginal transforms."""
    n = cfg.n
    z1 = np.empty(n)
    z2 = np.empty(n)
    uz = np.empty(n)
    streams = [] if keep_streams else None
    for i in range(n):
        stream = _record_stream(cfg.seed, i)
        z1[i], z2[i] = stream.standard_normal(2)
        uz[i] = stream.uniform()
        if keep_streams:
            streams.append(stream)
    rho = cfg.copula_rho
    y = rho * z1 + math.sqrt(1.0 - rho * rho) * z2
    if cfg.theta_fixed is not None:
        theta = np.full(n, cfg.theta_fixed)
    else:
        theta = betaincinv(cfg.theta_alpha, cfg.theta_beta, ndtr(z1))
    a = cfg.a_scale * betaincinv(cfg.a_alpha, cfg.a_beta, ndtr(y))
    z = cfg.z_lo + (cfg.z_hi - cfg.z_lo) * uz
    return theta, a, z, streams


def sample_types(cfg: DgpConfig):
    """Type pairs drawn through the Gaussian copula; deterministic in seed."""
    from .model import TypePair

    theta, a, _, _ = _draw_raw(cfg)
    eps = 1e-300
    return [TypePair(risk=max(t, eps), risk_aversion=max(v, eps)) for t, v in zip(theta, a)]


def simulate_dataset(cfg: DgpConfig) -> list[InsureeRecord]:
    """Full-observation dataset: chosen contract, claim count, damages."""
    theta, a, z, streams = _draw_raw(cfg, keep_streams=True)
    rule = cfg.menu_rule
    # Coverage 1 is chosen when risk is below the indifference frontier.
    denom = cfg.damage.ews_integral(a, rule.dd2, rule.dd1)
    t1 = rule.t1_intercept + rule.t1_slope * z
    frontier = (rule.t2 - t1) / denom
    chi = np.where(theta <= frontier, 1, 2)

    records = []
    for i in range(cfg.n):
        stream = streams[i]  # continues right after the type/instrument draws
        j = int(stream.poisson(theta[i]))
        damages = np.round(cfg.damage.draw(stream, j), DAMAGE_DECIMALS) if j else []
        records.append(
            InsureeRecord(
                id=i,
                z=float(z[i]),
                chi=int(chi[i]),
                j=j,
                damages=tuple(float(d) for d in np.atleast_1d(damages)) if j else (),
                theta_true=float(theta[i]),
                a_true=float(a[i]),
            )
        )
    return records


def apply_truncation(records, menu_rule: LinearMenuRule) -> list[InsureeRecord]:
    """Keep only claims at or above the chosen contract's deductible.

    The surviving count is a binomial thinning of the accident count with
    retention probability ``survival(deductible)``.
    """
    out = []
    for rec in records:
        dd = menu_rule.deductible(rec.z, rec.chi)
        kept = tuple(d for d in rec.damages if d >= dd)
        out.append(
            InsureeRecord(
                id=rec.id,
                z=rec.z,
                chi=rec.chi,
                j=len(kept),
                damages=kept,
                theta_true=rec.theta_true,
                a_true=rec.a_true,
            )
        )
    return out


def counts(records) -> np.ndarray:
    return np.array([r.j for r in records], dtype=int)


def instruments(records) -> np.ndarray:
    return np.array([r.z for r in records], dtype=float)


def choices(records) -> np.ndarray:
    return np.array([r.chi for r in records], dtype=int)


def pooled_damages(records) -> np.ndarray:
    return np.array([d for r in records for d in r.damages], dtype=float)
