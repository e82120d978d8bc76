"""Render static figure analogues from insurelab CSV outputs.

Six figures are supported:

    1  contract frontiers in the (aversion, risk) plane
    2  latent-type scatter with frontier curves at several instrument values
    3  claim-count histogram
    4  marginal risk density with 90% bands and the true curve
    5  conditional aversion density at risk 0.4, bands plus truth
    6  same at risk 0.6 on its partially identified range

Renderers are pure file-to-file transforms: fixed style, pinned metadata,
no timestamps, so re-rendering overwrites byte-identically.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": "plotviz"}}


class SchemaError(ValueError):
    """An input CSV does not carry the documented columns."""


DEFAULT_INPUTS = {
    1: ("fig1_frontiers.csv",),
    2: ("truth.csv", "fig2_frontiers.csv"),
    3: ("j_hist.csv",),
    4: ("fig4_ftheta.csv", "true_ftheta.csv"),
    5: ("fig5_fa_theta04.csv", "true_fa_theta04.csv"),
    6: ("fig6_fa_theta06.csv", "true_fa_theta06.csv"),
}


@dataclass(frozen=True)
class FigureSpec:
    figure: int
    inputs: tuple
    output: str
    title: str | None = None

    @staticmethod
    def from_directory(figure: int, directory: str, output: str) -> "FigureSpec":
        names = DEFAULT_INPUTS.get(figure)
        if names is None:
            raise SchemaError(f"unknown figure id {figure}; expected 1..6")
        paths = tuple(os.path.join(directory, n) for n in names)
        for p in paths:
            if not os.path.exists(p):
                raise FileNotFoundError(f"missing input {p} for figure {figure}")
        return FigureSpec(figure=figure, inputs=paths, output=output)


def read_columns(path: str, expected: tuple) -> dict:
    """Read a comma-separated file with the given header columns.

    Comment lines starting with '#' are skipped; a header mismatch raises
    :class:`SchemaError` naming the first missing column.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    for col in expected:
        if col not in header:
            raise SchemaError(f"{os.path.basename(path)}: missing column {col!r}")
    idx = [header.index(c) for c in expected]
    rows = [ln.split(",") for ln in lines[1:]]
    out = {}
    for col, i in zip(expected, idx):
        values = [r[i] for r in rows]
        try:
            out[col] = np.array([float(v) for v in values])
        except ValueError:
            out[col] = np.array(values)
    return out


def render(spec: FigureSpec) -> str:
    handler = _RENDERERS.get(spec.figure)
    if handler is None:
        raise SchemaError(f"unknown figure id {spec.figure}; expected 1..6")
    fig = handler(spec)
    fig.savefig(spec.output, **_SAVE_KWARGS)
    plt.close(fig)
    return spec.output


def _new_axes(title):
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if title:
        ax.set_title(title)
    return fig, ax


def _fig1(spec: FigureSpec):
    cols = read_columns(spec.inputs[0], ("curve", "a", "theta"))
    fig, ax = _new_axes(spec.title or "Coverage frontiers")
    for label in dict.fromkeys(cols["curve"]):
        sel = cols["curve"] == label
        style = "--" if "no_ins" in str(label) else "-"
        ax.plot(cols["a"][sel], cols["theta"][sel], style, label=str(label))
    ax.set_xlabel("risk aversion")
    ax.set_ylabel("risk")
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="upper right", fontsize=8)
    return fig


def _fig2(spec: FigureSpec):
    truth = read_columns(spec.inputs[0], ("id", "theta", "a"))
    curves = read_columns(spec.inputs[1], ("curve", "a", "theta"))
    fig, ax = _new_axes(spec.title or "Latent types and frontiers")
    step = max(1, truth["theta"].size // 4000)
    ax.plot(truth["a"][::step], truth["theta"][::step], ".", ms=1.5, alpha=0.4,
            color="gray", label="types")
    for label in dict.fromkeys(curves["curve"]):
        sel = curves["curve"] == label
        ax.plot(curves["a"][sel], curves["theta"][sel], lw=1.4, label=str(label))
    ax.set_xlabel("risk aversion")
    ax.set_ylabel("risk")
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="upper right", fontsize=8)
    return fig


def _fig3(spec: FigureSpec):
    cols = read_columns(spec.inputs[0], ("j", "count"))
    fig, ax = _new_axes(spec.title or "Claim counts")
    ax.bar(cols["j"], cols["count"], width=0.8, color="steelblue")
    ax.set_xlabel("number of claims")
    ax.set_ylabel("insurees")
    return fig


def _band_figure(spec: FigureSpec, xlabel, title):
    bands = read_columns(spec.inputs[0], ("grid", "mean", "q05", "q95"))
    truth = read_columns(spec.inputs[1], ("grid_point", "value"))
    fig, ax = _new_axes(spec.title or title)
    ok = ~np.isnan(bands["mean"])
    ax.fill_between(bands["grid"][ok], bands["q05"][ok], bands["q95"][ok],
                    alpha=0.3, color="steelblue", label="90% band")
    ax.plot(bands["grid"][ok], bands["mean"][ok], color="steelblue", lw=1.4,
            label="mean estimate")
    ax.plot(truth["grid_point"], truth["value"], color="black", lw=1.2, ls="--",
            label="true density")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def _fig4(spec):
    return _band_figure(spec, "risk", "Marginal risk density")


def _fig5(spec):
    return _band_figure(spec, "risk aversion", "Aversion density at risk 0.4")


def _fig6(spec):
    return _band_figure(spec, "risk aversion", "Aversion density at risk 0.6")


_RENDERERS = {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5, 6: _fig6}
