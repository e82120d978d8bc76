"""File formats: datasets, flat key=value configs, density and band CSVs.

Datasets are three comma-separated files in a directory:

    insurees.csv  id,z,chi,j
    claims.csv    id,claim_idx,damage      (damage printed with 6 decimals)
    truth.csv     id,theta,a               (latent sidecar, optional)

Floats other than damages are written with ``repr`` so a write/read round
trip is lossless and byte-deterministic.
"""

from __future__ import annotations

import math
import os
from dataclasses import fields

import numpy as np

from .damage import DamageDist
from .dgp import DgpConfig, InsureeRecord, LinearMenuRule
from .errors import InvalidArgumentError, ParseError

INSUREES_FILE = "insurees.csv"
CLAIMS_FILE = "claims.csv"
TRUTH_FILE = "truth.csv"


def write_dataset(records, directory, include_truth=True):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, INSUREES_FILE), "w") as fh:
        fh.write("id,z,chi,j\n")
        for r in records:
            fh.write(f"{r.id},{r.z!r},{r.chi},{r.j}\n")
    with open(os.path.join(directory, CLAIMS_FILE), "w") as fh:
        fh.write("id,claim_idx,damage\n")
        for r in records:
            for idx, d in enumerate(r.damages, start=1):
                fh.write(f"{r.id},{idx},{d:.6f}\n")
    if include_truth and records and records[0].theta_true is not None:
        with open(os.path.join(directory, TRUTH_FILE), "w") as fh:
            fh.write("id,theta,a\n")
            for r in records:
                fh.write(f"{r.id},{r.theta_true!r},{r.a_true!r}\n")


def read_dataset(directory) -> list[InsureeRecord]:
    insurees = {}
    path = os.path.join(directory, INSUREES_FILE)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "id,z,chi,j":
            raise ParseError(f"unexpected insurees header {header!r}", line=1)
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != 4:
                raise ParseError(f"expected 4 fields, got {len(parts)}", line=lineno)
            try:
                rid, z, chi, j = int(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if chi < 1 or j < 0:
                raise ParseError(f"invalid chi={chi} or j={j}", line=lineno)
            insurees[rid] = (z, chi, j)

    claims: dict[int, list[float]] = {rid: [] for rid in insurees}
    claims_path = os.path.join(directory, CLAIMS_FILE)
    if os.path.exists(claims_path):
        with open(claims_path) as fh:
            header = fh.readline().strip()
            if header != "id,claim_idx,damage":
                raise ParseError(f"unexpected claims header {header!r}", line=1)
            for lineno, line in enumerate(fh, start=2):
                parts = line.strip().split(",")
                if len(parts) != 3:
                    raise ParseError(f"expected 3 fields, got {len(parts)}", line=lineno)
                try:
                    rid, damage = int(parts[0]), float(parts[2])
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
                if damage < 0:
                    raise ParseError(f"negative damage {damage}", line=lineno)
                if rid not in claims:
                    raise ParseError(f"claim for unknown insuree {rid}", line=lineno)
                claims[rid].append(damage)

    truth: dict[int, tuple[float, float]] = {}
    truth_path = os.path.join(directory, TRUTH_FILE)
    if os.path.exists(truth_path):
        with open(truth_path) as fh:
            fh.readline()
            for lineno, line in enumerate(fh, start=2):
                parts = line.strip().split(",")
                try:
                    truth[int(parts[0])] = (float(parts[1]), float(parts[2]))
                except (ValueError, IndexError) as exc:
                    raise ParseError(str(exc), line=lineno) from exc

    records = []
    for rid in sorted(insurees):
        z, chi, j = insurees[rid]
        damages = tuple(claims.get(rid, []))
        if len(damages) != j:
            raise ParseError(f"insuree {rid}: j={j} but {len(damages)} claims on file")
        th, av = truth.get(rid, (None, None))
        records.append(
            InsureeRecord(id=rid, z=z, chi=chi, j=j, damages=damages, theta_true=th, a_true=av)
        )
    return records


# -- flat key=value configs ------------------------------------------------


def format_damage(damage: DamageDist) -> str:
    if damage.kind == "uniform":
        return f"uniform:0,{damage.upper!r}"
    if damage.kind == "exponential":
        return f"exponential:{damage.mean!r}"
    raise InvalidArgumentError("only analytic damage kinds can go in a config file")


def parse_damage(text: str) -> DamageDist:
    try:
        kind, _, args = text.partition(":")
        if kind == "uniform":
            lo, hi = (float(x) for x in args.split(","))
            if lo != 0.0:
                raise InvalidArgumentError("uniform damage support must start at 0")
            return DamageDist.uniform(hi)
        if kind == "exponential":
            return DamageDist.exponential(float(args))
    except (ValueError, TypeError) as exc:
        raise InvalidArgumentError(f"bad damage spec {text!r}: {exc}") from exc
    raise InvalidArgumentError(f"unknown damage kind in {text!r}")


def config_lines(cfg: DgpConfig) -> list[str]:
    return [
        f"n={cfg.n}",
        f"theta_alpha={cfg.theta_alpha!r}",
        f"theta_beta={cfg.theta_beta!r}",
        f"a_alpha={cfg.a_alpha!r}",
        f"a_beta={cfg.a_beta!r}",
        f"a_scale={cfg.a_scale!r}",
        f"copula_rho={cfg.copula_rho!r}",
        f"damage={format_damage(cfg.damage)}",
        f"z_lo={cfg.z_lo!r}",
        f"z_hi={cfg.z_hi!r}",
        f"t1_slope={cfg.menu_rule.t1_slope!r}",
        f"t1_intercept={cfg.menu_rule.t1_intercept!r}",
        f"dd1={cfg.menu_rule.dd1!r}",
        f"t2={cfg.menu_rule.t2!r}",
        f"dd2={cfg.menu_rule.dd2!r}",
        f"seed={cfg.seed}",
    ]


def write_config(cfg: DgpConfig, path):
    with open(path, "w") as fh:
        fh.write("\n".join(config_lines(cfg)) + "\n")


def read_config(path) -> DgpConfig:
    pairs = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {line!r}", line=lineno)
            key, _, value = line.partition("=")
            pairs[key.strip()] = value.strip()
    return config_from_pairs(pairs)


def config_from_pairs(pairs: dict) -> DgpConfig:
    known_menu = {"t1_slope", "t1_intercept", "dd1", "t2", "dd2"}
    known_cfg = {f.name for f in fields(DgpConfig)} - {"menu_rule", "damage", "theta_fixed"}
    unknown = set(pairs) - known_menu - known_cfg - {"damage"}
    if unknown:
        raise InvalidArgumentError(f"unknown config key: {sorted(unknown)[0]}")
    if "seed" not in pairs:
        raise InvalidArgumentError("config key 'seed' is required (no wall-clock default)")
    kwargs = {}
    for key, value in pairs.items():
        if key in known_menu:
            continue
        if key == "damage":
            kwargs["damage"] = parse_damage(value)
        elif key in ("n", "seed"):
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    menu_kwargs = {k: float(v) for k, v in pairs.items() if k in known_menu}
    kwargs["menu_rule"] = LinearMenuRule(**menu_kwargs)
    return DgpConfig(**kwargs)


# -- density and band CSVs -------------------------------------------------


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def write_density_csv(path, grid, values, support, coeffs):
    """``grid_point,value`` rows with a comment line carrying the support
    endpoints and the basis coefficients."""
    coeff_text = ";".join(repr(float(c)) for c in np.atleast_1d(coeffs))
    with open(path, "w") as fh:
        fh.write(f"# support={support[0]!r},{support[1]!r} coeffs={coeff_text}\n")
        fh.write("grid_point,value\n")
        for g, v in zip(grid, values):
            fh.write(f"{_fmt(g)},{_fmt(v)}\n")


def read_curve_csv(path):
    """Read any of the two-or-more-column CSVs written by this module."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, data


def write_band_csv(path, grid, mean, q05, q95):
    with open(path, "w") as fh:
        fh.write("grid,mean,q05,q95\n")
        for row in zip(grid, mean, q05, q95):
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_histogram_csv(path, values, counts):
    with open(path, "w") as fh:
        fh.write("j,count\n")
        for v, c in zip(values, counts):
            fh.write(f"{v},{c}\n")


def write_frontier_curves_csv(path, curves):
    """``curve,a,theta`` rows; ``curves`` maps a label to (a_grid, theta)."""
    with open(path, "w") as fh:
        fh.write("curve,a,theta\n")
        for label, (a_grid, theta) in curves.items():
            for a, t in zip(a_grid, theta):
                fh.write(f"{label},{_fmt(a)},{_fmt(t)}\n")
