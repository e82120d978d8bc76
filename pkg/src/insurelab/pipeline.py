"""Full estimation runs and the Monte Carlo replication study.

``run_three_step`` chains claim-count demixing, the conditional-on-choice
density fit, and the instrument-variation aversion density into one bundle.
``mc_study`` repeats simulation plus estimation over independently seeded
replications and reports pointwise means and 5/95 percent quantile bands.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .aversion import aversion_density
from .conditional import (
    ConditionalFit,
    SampleView,
    estimate_choice_share,
    estimate_conditional_density,
    estimate_damage_cdf,
)
from .dataio import write_band_csv
from .demix import demix_poisson
from .dgp import DgpConfig, counts, pooled_damages, simulate_dataset
from .errors import StudyError
from .kernel import KernelSpec, silverman_bandwidth
from .legendre import LegendreDensity
from .moments import factorial_moments, moment_order_rule


@dataclass(frozen=True)
class EstimatorConfig:
    z0_values: tuple = (150.0,)
    theta_stars: tuple = (0.4, 0.6)
    a_support_max: float = 1e-3
    order: int | None = None          # None: moment_order_rule(n)
    theta_grid_size: int = 201
    a_grid_size: int = 101
    h_z: float | None = None          # None: one instrument bandwidth
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def theta_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.theta_grid_size)

    def a_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.a_support_max, self.a_grid_size)


@dataclass(frozen=True)
class EstimateBundle:
    risk_density: LegendreDensity
    conditional: dict
    aversion: dict
    order: int
    h_z: float
    z_range: tuple


def run_three_step(records, menu_rule, cfg: EstimatorConfig) -> EstimateBundle:
    js = counts(records)
    order = cfg.order if cfg.order is not None else moment_order_rule(js.size)
    risk_density = demix_poisson(
        factorial_moments(js, order), grid_size=cfg.theta_grid_size
    )
    damage_cdf = estimate_damage_cdf(pooled_damages(records))
    view = SampleView.from_records(records)
    zs = view.z
    z_range = (float(zs.min()), float(zs.max()))
    # One kernel bandwidth balances finite-difference bias against the
    # replication noise of the fitted choice probability.
    h_z = cfg.h_z if cfg.h_z is not None else silverman_bandwidth(zs)

    fit_cache: dict[float, ConditionalFit] = {}

    def fit_at(z: float) -> ConditionalFit:
        fit = fit_cache.get(z)
        if fit is None:
            nu1 = estimate_choice_share(view, z, cfg.kernel)
            fit = estimate_conditional_density(
                view,
                z,
                menu_rule,
                damage_cdf,
                risk_density,
                nu1,
                a_max=cfg.a_support_max,
                order=order,
                spec=cfg.kernel,
                grid_size=cfg.theta_grid_size,
            )
            fit_cache[z] = fit
        return fit

    conditional = {z0: fit_at(z0) for z0 in cfg.z0_values}

    integral_cache: dict[tuple, float] = {}

    def weighted_integral(a: float, weighted: bool) -> float:
        key = (a, weighted)
        val = integral_cache.get(key)
        if val is None:
            fn = damage_cdf.dews_integral if weighted else damage_cdf.ews_integral
            val = fn(a, menu_rule.dd2, menu_rule.dd1)
            integral_cache[key] = val
        return val

    def frontier_fn(a: float, z: float) -> float:
        lo, hi = menu_rule.coverages(z)
        return (hi.premium - lo.premium) / weighted_integral(a, False)

    def dfrontier_da_fn(a: float, z: float) -> float:
        return -frontier_fn(a, z) * weighted_integral(a, True) / weighted_integral(a, False)

    def pr_fn(theta: float, z: float) -> float:
        return fit_at(z).pr_at(theta)

    aversion = {
        theta_star: aversion_density(
            theta_star,
            frontier_fn,
            dfrontier_da_fn,
            pr_fn,
            a_grid=cfg.a_grid(),
            z_range=z_range,
            h_z=h_z,
            a_support_max=cfg.a_support_max,
        )
        for theta_star in cfg.theta_stars
    }
    return EstimateBundle(
        risk_density=risk_density,
        conditional=conditional,
        aversion=aversion,
        order=order,
        h_z=h_z,
        z_range=z_range,
    )


# -- Monte Carlo study -------------------------------------------------------


@dataclass(frozen=True)
class McSummary:
    name: str
    grid: np.ndarray
    mean: np.ndarray
    q05: np.ndarray
    q95: np.ndarray
    reps: int


@dataclass(frozen=True)
class McStudy:
    summaries: dict
    ranges: dict          # theta_star -> (reps, 2) array of identified endpoints
    failures: tuple
    reps: int
    master_seed: int


def replication_seed(master_seed: int, rep: int) -> int:
    state = np.random.SeedSequence(entropy=master_seed, spawn_key=(rep,)).generate_state(1)
    return int(state[0])


def _run_replication(args):
    dgp_cfg, est_cfg, rep = args
    rep_cfg = dgp_cfg.with_seed(replication_seed(dgp_cfg.seed, rep))
    records = simulate_dataset(rep_cfg)
    bundle = run_three_step(records, rep_cfg.menu_rule, est_cfg)
    theta_grid = est_cfg.theta_grid()
    out = {
        "ftheta": np.asarray(bundle.risk_density.pdf(theta_grid)),
        "aversion": {},
        "ranges": {},
    }
    for theta_star, res in bundle.aversion.items():
        out["aversion"][theta_star] = res.values
        out["ranges"][theta_star] = (res.a_min, res.a_max)
    return out


def mc_study(
    dgp_cfg: DgpConfig,
    est_cfg: EstimatorConfig,
    reps: int,
    threads: int = 1,
) -> McStudy:
    """Replicated simulate-and-estimate runs with pointwise 90% bands.

    Replication seeds derive from the master seed, so results are identical
    for any worker count.  Failed replications are recorded and excluded;
    more than 10% failures aborts the study.
    """
    if reps < 2:
        raise StudyError(f"need at least 2 replications, got {reps}")
    jobs = [(dgp_cfg, est_cfg, rep) for rep in range(reps)]
    results: list = [None] * reps
    failures = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_mc_worker, jobs))
    else:
        outcomes = [_mc_worker(job) for job in jobs]
    for rep, (ok, payload) in enumerate(outcomes):
        if ok:
            results[rep] = payload
        else:
            failures.append((rep, payload))
    if len(failures) > 0.1 * reps:
        raise StudyError(
            f"{len(failures)} of {reps} replications failed; first: {failures[0][1]}"
        )
    good = [r for r in results if r is not None]

    summaries = {}
    theta_grid = est_cfg.theta_grid()
    ftheta = np.stack([r["ftheta"] for r in good])
    summaries["ftheta"] = _summarise("ftheta", theta_grid, ftheta, len(good))
    a_grid = est_cfg.a_grid()
    ranges = {}
    for theta_star in est_cfg.theta_stars:
        curves = np.stack([r["aversion"][theta_star] for r in good])
        name = f"fa_theta{theta_star:g}"
        summaries[name] = _summarise(name, a_grid, curves, len(good))
        ranges[theta_star] = np.array([r["ranges"][theta_star] for r in good])
    return McStudy(
        summaries=summaries,
        ranges=ranges,
        failures=tuple(failures),
        reps=len(good),
        master_seed=dgp_cfg.seed,
    )


def _mc_worker(job):
    try:
        return True, _run_replication(job)
    except Exception as exc:  # record-and-exclude policy
        return False, f"{type(exc).__name__}: {exc}"


def _summarise(name, grid, curves, reps) -> McSummary:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN grid points
        mean = np.nanmean(curves, axis=0)
        q05 = np.nanquantile(curves, 0.05, axis=0)
        q95 = np.nanquantile(curves, 0.95, axis=0)
    return McSummary(name=name, grid=grid, mean=mean, q05=q05, q95=q95, reps=reps)


FIG_FILENAMES = {
    "ftheta": "fig4_ftheta.csv",
    "fa_theta0.4": "fig5_fa_theta04.csv",
    "fa_theta0.6": "fig6_fa_theta06.csv",
}


def write_study_csvs(study: McStudy, out_dir) -> list:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, summary in study.summaries.items():
        filename = FIG_FILENAMES.get(name, f"{name}.csv")
        path = os.path.join(out_dir, filename)
        write_band_csv(path, summary.grid, summary.mean, summary.q05, summary.q95)
        written.append(path)
    return written
