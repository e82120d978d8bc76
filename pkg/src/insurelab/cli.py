"""Command-line entry point.

Subcommands: ``simulate``, ``estimate``, ``mc``, ``validate-menu``,
``oracle``.  Every run echoes its configuration and seed into a manifest
file in the output directory; exit codes are 0 on success, 2 for
configuration problems (the message names the offending key), and 1 for
numeric failures.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dataio
from .dgp import DgpConfig, apply_truncation, counts, simulate_dataset
from .errors import InsurelabError, InvalidArgumentError, ParseError
from .model import ContractMenu, Coverage, validate_menu
from .oracle import (
    format_reports,
    oracle_frontier,
    standard_reports,
    true_conditional_density,
    true_theta_density,
)
from .pipeline import EstimatorConfig, mc_study, run_three_step, write_study_csvs

FIG2_Z_VALUES = (110.0, 130.0, 150.0, 170.0, 190.0)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (InvalidArgumentError, ParseError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InsurelabError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="insurelab")
    sub = parser.add_subparsers(required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--truncate", action="store_true",
                     help="drop claims below the chosen deductible")
    sim.add_argument("--no-truth", action="store_true",
                     help="skip the latent-type sidecar file")
    sim.set_defaults(handler=cmd_simulate)

    est = sub.add_parser("estimate", help="run the three-step estimator on a dataset")
    est.add_argument("--config", required=True)
    est.add_argument("--data", required=True)
    est.add_argument("--out", required=True)
    est.add_argument("--z0", type=float, nargs="+", default=[150.0])
    est.add_argument("--theta-star", type=float, nargs="+", default=[0.4, 0.6])
    est.set_defaults(handler=cmd_estimate)

    mc = sub.add_parser("mc", help="replication study with quantile bands")
    mc.add_argument("--config", required=True)
    mc.add_argument("--reps", type=int, required=True)
    mc.add_argument("--out", required=True)
    mc.add_argument("--threads", type=int, default=1)
    mc.add_argument("--n", type=int, default=None, help="override the configured sample size")
    mc.set_defaults(handler=cmd_mc)

    val = sub.add_parser("validate-menu", help="check the menu spacing conditions")
    val.add_argument("--menu", required=True,
                     help="semicolon-separated premium,deductible pairs")
    val.add_argument("--damage", required=True, help="e.g. uniform:0,10000")
    val.add_argument("--a-lower", type=float, required=True)
    val.set_defaults(handler=cmd_validate_menu)

    orc = sub.add_parser("oracle", help="print brute-force reference values")
    orc.add_argument("--config", default=None)
    orc.add_argument("--out", default=None)
    orc.set_defaults(handler=cmd_oracle)
    return parser


def _write_manifest(out_dir, cfg: DgpConfig | None, extra: dict):
    os.makedirs(out_dir, exist_ok=True)
    lines = []
    if cfg is not None:
        lines.append("[dgp]")
        lines.extend(dataio.config_lines(cfg))
    lines.append("[run]")
    lines.extend(f"{k}={v}" for k, v in extra.items())
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_simulate(args) -> int:
    cfg = dataio.read_config(args.config)
    records = simulate_dataset(cfg)
    if args.truncate:
        records = apply_truncation(records, cfg.menu_rule)
    dataio.write_dataset(records, args.out, include_truth=not args.no_truth)
    js = counts(records)
    hist = np.bincount(js)
    dataio.write_histogram_csv(os.path.join(args.out, "j_hist.csv"), range(hist.size), hist)
    _write_manifest(args.out, cfg, {"command": "simulate", "records": len(records),
                                    "truncated": args.truncate})
    return 0


def cmd_estimate(args) -> int:
    cfg = dataio.read_config(args.config)
    records = dataio.read_dataset(args.data)
    est_cfg = EstimatorConfig(
        z0_values=tuple(args.z0),
        theta_stars=tuple(args.theta_star),
        a_support_max=cfg.a_scale,
    )
    status = {"command": "estimate", "records": len(records), "status": "failed"}
    try:
        bundle = run_three_step(records, cfg.menu_rule, est_cfg)
        status["status"] = "ok"
        status["order"] = bundle.order
        status["h_z"] = bundle.h_z
    finally:
        _write_manifest(args.out, cfg, status)
    grid = est_cfg.theta_grid()
    dataio.write_density_csv(
        os.path.join(args.out, "step1_ftheta.csv"),
        grid,
        np.asarray(bundle.risk_density.pdf(grid)),
        bundle.risk_density.support,
        bundle.risk_density.coeffs,
    )
    for z0, fit in bundle.conditional.items():
        dataio.write_density_csv(
            os.path.join(args.out, f"step2_z{z0:g}_density.csv"),
            fit.theta_grid,
            fit.density_values,
            (fit.boundary_lo, fit.boundary_hi),
            fit.tail_density.coeffs,
        )
        dataio.write_density_csv(
            os.path.join(args.out, f"step2_z{z0:g}_pr.csv"),
            fit.theta_grid,
            fit.pr_values,
            (fit.boundary_lo, fit.boundary_hi),
            fit.tail_density.coeffs,
        )
    for theta_star, res in bundle.aversion.items():
        dataio.write_density_csv(
            os.path.join(args.out, f"step3_fa_theta{theta_star:g}.csv"),
            res.a_grid,
            res.values,
            (res.a_min, res.a_max),
            np.zeros(0),
        )
    return 0


def cmd_mc(args) -> int:
    cfg = dataio.read_config(args.config)
    if args.n is not None:
        import dataclasses

        cfg = dataclasses.replace(cfg, n=args.n)
    est_cfg = EstimatorConfig(a_support_max=cfg.a_scale)
    status = {"command": "mc", "reps": args.reps, "threads": args.threads,
              "status": "failed", "failures": ""}
    try:
        study = mc_study(cfg, est_cfg, reps=args.reps, threads=args.threads)
        status["status"] = "ok"
        status["failures"] = len(study.failures)
        for theta_star, arr in study.ranges.items():
            status[f"identified_range_theta{theta_star:g}"] = (
                f"{arr[:, 0].mean()!r},{arr[:, 1].mean()!r}"
            )
    finally:
        _write_manifest(args.out, cfg, status)
    write_study_csvs(study, args.out)
    _write_figure_inputs(cfg, args.out)
    return 0


def _write_figure_inputs(cfg: DgpConfig, out_dir):
    """Oracle overlays plus one dataset snapshot for the scatter/histogram
    figures, all derived deterministically from the config."""
    grid = np.linspace(0.0, 1.0, 201)
    dataio.write_density_csv(
        os.path.join(out_dir, "true_ftheta.csv"),
        grid, true_theta_density(grid, cfg), (0.0, 1.0), np.zeros(0),
    )
    a_grid = np.linspace(0.0, cfg.a_scale, 101)
    for theta_star, name in ((0.4, "true_fa_theta04.csv"), (0.6, "true_fa_theta06.csv")):
        dens = np.array([true_conditional_density(theta_star, a, cfg) for a in a_grid])
        dataio.write_density_csv(
            os.path.join(out_dir, name), a_grid, dens, (0.0, cfg.a_scale), np.zeros(0)
        )

    a_curve = np.linspace(1e-6, cfg.a_scale, 60)
    curves = {
        f"z={z:g}": (a_curve, np.array([oracle_frontier(a, z, cfg) for a in a_curve]))
        for z in FIG2_Z_VALUES
    }
    dataio.write_frontier_curves_csv(os.path.join(out_dir, "fig2_frontiers.csv"), curves)

    from .damage import DamageDist
    from .model import no_insurance

    uniform = DamageDist.uniform(1e4)
    fig1_pairs = {
        "no_ins_vs_1": (no_insurance(1e4), Coverage(600.0, 1000.0)),
        "1_vs_2": (Coverage(600.0, 1000.0), Coverage(850.0, 500.0)),
        "2_vs_3": (Coverage(850.0, 500.0), Coverage(1000.0, 250.0)),
    }
    from .model import frontier_risk_batch

    curves1 = {
        label: (a_curve, frontier_risk_batch(a_curve, lo, hi, uniform))
        for label, (lo, hi) in fig1_pairs.items()
    }
    dataio.write_frontier_curves_csv(os.path.join(out_dir, "fig1_frontiers.csv"), curves1)

    snapshot = simulate_dataset(cfg.with_seed(cfg.seed))
    dataio.write_dataset(snapshot, out_dir, include_truth=True)
    hist = np.bincount(counts(snapshot))
    dataio.write_histogram_csv(os.path.join(out_dir, "j_hist.csv"), range(hist.size), hist)


def cmd_validate_menu(args) -> int:
    try:
        pairs = [tuple(float(x) for x in part.split(",")) for part in args.menu.split(";")]
        coverages = tuple(Coverage(t, dd) for t, dd in pairs)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"bad menu spec {args.menu!r}: {exc}") from exc
    damage = dataio.parse_damage(args.damage)
    upper = damage.upper if np.isfinite(damage.upper) else 1e12
    report = validate_menu(ContractMenu(coverages, upper), damage, args.a_lower)
    print(f"rp_ok={report.rp_ok}")
    print(f"ordering_ok={report.ordering_ok}")
    print(f"convexity_ok={report.convexity_ok}")
    for idx, triple in enumerate(report.triples, start=1):
        print(
            f"triple {idx}: premium_ratio={triple.premium_ratio:.6g} "
            f"integral_ratio={triple.integral_ratio:.6g} kappa={triple.kappa:.6g} "
            f"slope_hi={triple.slope_hi:.6g} slope_lo_scaled={triple.slope_lo_scaled:.6g}"
        )
    return 0 if report.passed else 1


def cmd_oracle(args) -> int:
    cfg = dataio.read_config(args.config) if args.config else None
    reports = standard_reports(cfg)
    print(format_reports(reports))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "oracle_reports.csv"), "w") as fh:
            fh.write("quantity,value,error,method\n")
            for r in reports:
                fh.write(f"{r.quantity},{r.value!r},{r.error!r},{r.method}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
