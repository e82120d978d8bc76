"""Nadaraya-Watson regression with a Gaussian kernel.

Bandwidths default to the rule of thumb ``1.06 * sd * n^(-1/5)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel; ``bandwidth=None`` means the rule of thumb."""

    bandwidth: float | None = None

    def resolve(self, xs: np.ndarray) -> float:
        bw = self.bandwidth if self.bandwidth is not None else silverman_bandwidth(xs)
        if not (bw > 0):
            raise InvalidArgumentError(f"bandwidth must be positive, got {bw}")
        return bw


def silverman_bandwidth(xs) -> float:
    xs = np.asarray(xs, dtype=float)
    sd = float(np.std(xs))
    if sd == 0.0:
        sd = max(abs(float(np.mean(xs))), 1.0) * 1e-3
    return 1.06 * sd * xs.size ** (-1 / 5)


class KernelFit(NamedTuple):
    value: float
    extrapolated: bool


def kernel_regress(xs, ys, x0: float, spec: KernelSpec = KernelSpec()) -> KernelFit:
    """Local mean of ``ys`` at ``x0``.

    Outside the observed range of ``xs`` the estimate is evaluated at the
    nearest data boundary and flagged as extrapolated.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0:
        raise InsufficientDataError("kernel regression needs data")
    bw = spec.resolve(xs)
    lo, hi = float(xs.min()), float(xs.max())
    extrapolated = x0 < lo or x0 > hi
    point = min(max(x0, lo), hi)
    w = np.exp(-0.5 * ((xs - point) / bw) ** 2)
    mass = float(np.sum(w))
    if mass <= 0.0:  # only via underflow of every kernel weight
        raise InsufficientDataError(f"no kernel mass near {x0}")
    return KernelFit(value=float(np.sum(w * ys) / mass), extrapolated=extrapolated)


def local_weights(xs, x0: float, spec: KernelSpec = KernelSpec()):
    """Kernel weights at ``x0`` (clamped into the data range) and the
    effective local sample size ``(sum w)^2 / sum w^2``."""
    xs = np.asarray(xs, dtype=float)
    bw = spec.resolve(xs)
    point = min(max(x0, float(xs.min())), float(xs.max()))
    w = np.exp(-0.5 * ((xs - point) / bw) ** 2)
    sq = float(np.sum(w**2))
    n_eff = float(np.sum(w)) ** 2 / sq if sq > 0 else 0.0
    return w, n_eff
