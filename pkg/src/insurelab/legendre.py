"""Orthonormal shifted Legendre basis on [0, 1] and polynomial densities.

``L_m(x) = sqrt(2m+1) * P_m(2x - 1)`` so that ``int_0^1 L_m L_k = delta_mk``
and ``int_0^1 L_m = 0`` for ``m >= 1``.  A density represented as
``1 + sum_m lam_m L_m`` therefore integrates to one by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError


def shifted_legendre(m: int, x):
    """Orthonormal shifted Legendre polynomial of degree ``m`` at ``x``.

    Uses the stable three-term recurrence in ``t = 2x - 1``.
    """
    if m < 0:
        raise InvalidArgumentError(f"degree must be >= 0, got {m}")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise InvalidArgumentError("evaluation points must lie in [0, 1]")
    t = 2.0 * x_arr - 1.0
    p_prev = np.ones_like(t)
    if m == 0:
        out = p_prev
    else:
        p_cur = t.copy()
        for k in range(1, m):
            p_prev, p_cur = p_cur, ((2 * k + 1) * t * p_cur - k * p_prev) / (k + 1)
        out = p_cur
    out = np.sqrt(2 * m + 1) * out
    return out if out.ndim else float(out)


def basis_matrix(order: int, x) -> np.ndarray:
    """Matrix ``[L_1(x), ..., L_order(x)]`` with one row per point."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    return np.stack([shifted_legendre(m, x_arr) for m in range(1, order + 1)], axis=1)


@lru_cache(maxsize=None)
def monomial_coefficients(order: int) -> tuple:
    """Monomial coefficients (lowest first) of L_0..L_order on [0, 1]."""
    coeffs = [np.array([1.0])]
    if order >= 1:
        coeffs.append(np.array([-1.0, 2.0]))  # P_1(2x-1) = 2x - 1
    for k in range(1, order):
        # (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1} with t = 2x - 1
        t_pk = np.convolve(coeffs[k], [-1.0, 2.0])
        prev = np.pad(coeffs[k - 1], (0, t_pk.size - coeffs[k - 1].size))
        coeffs.append(((2 * k + 1) * t_pk - k * prev) / (k + 1))
    return tuple(np.sqrt(2 * m + 1) * c for m, c in enumerate(coeffs))


@lru_cache(maxsize=None)
def power_moment_matrix(order: int) -> tuple:
    """Pair ``(b, A)`` with ``b_m = int x^m`` and ``A[m-1, k-1] = int x^m L_k``.

    The fitted moments are then ``mu(lam) = b + A @ lam``; ``A`` is lower
    triangular because ``L_k`` is orthogonal to lower-degree monomials.
    """
    coeffs = monomial_coefficients(order)
    b = np.array([1.0 / (m + 1) for m in range(1, order + 1)])
    A = np.zeros((order, order))
    for m in range(1, order + 1):
        for k in range(1, order + 1):
            c = coeffs[k]
            A[m - 1, k - 1] = sum(c[i] / (m + i + 1) for i in range(c.size))
    return b, A


def _series_critical_values(coeffs):
    """Candidate minima of ``1 + sum coeffs[m-1] L_m`` on [0, 1]: the
    endpoints plus the real derivative roots."""
    coeffs = np.asarray(coeffs, dtype=float)
    order = coeffs.size
    mono = monomial_coefficients(order)
    poly = np.zeros(order + 1)
    poly[0] = 1.0
    for k in range(1, order + 1):
        c = mono[k]
        poly[: c.size] += coeffs[k - 1] * c
    deriv = poly[1:] * np.arange(1, poly.size)
    candidates = [0.0, 1.0]
    if deriv.size and np.any(deriv != 0.0):
        roots = np.roots(deriv[::-1])
        candidates.extend(
            float(r.real) for r in roots if abs(r.imag) < 1e-10 and 0.0 < r.real < 1.0
        )
    return [(x, float(np.polyval(poly[::-1], x))) for x in candidates]


def series_min_on_unit(coeffs) -> tuple[float, float]:
    """Exact minimum of ``1 + sum coeffs[m-1] L_m`` on [0, 1]."""
    pairs = _series_critical_values(coeffs)
    return min(pairs, key=lambda p: p[1])


def series_negative_minima(coeffs, tol: float) -> list:
    """All candidate points where the series dips below ``tol``."""
    return [(x, v) for x, v in _series_critical_values(coeffs) if v < tol]


@dataclass(frozen=True)
class LegendreDensity:
    """Density ``(1/width) * (1 + sum_m coeffs[m-1] * L_m(x))`` on a support
    interval, with ``x`` the affine rescaling of the argument to [0, 1]."""

    support: tuple[float, float]
    coeffs: np.ndarray
    grid_size: int = 201

    def __post_init__(self):
        lo, hi = self.support
        if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
            raise InvalidArgumentError(f"bad support interval {self.support}")
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    @property
    def order(self) -> int:
        return self.coeffs.size

    def _rescale(self, theta):
        lo, hi = self.support
        return (np.asarray(theta, dtype=float) - lo) / (hi - lo)

    def pdf(self, theta):
        lo, hi = self.support
        theta_arr = np.asarray(theta, dtype=float)
        x = np.clip(self._rescale(theta_arr), 0.0, 1.0)
        vals = np.ones_like(x)
        if self.order:
            vals = vals + basis_matrix(self.order, x.ravel()).reshape(
                x.shape + (self.order,)
            ) @ self.coeffs
        vals = vals / (hi - lo)
        vals = np.where((theta_arr < lo) | (theta_arr > hi), 0.0, vals)
        return vals if vals.ndim else float(vals)

    def cdf(self, theta):
        """Exact polynomial integral of the density from the lower endpoint."""
        lo, hi = self.support
        x = np.clip(self._rescale(theta), 0.0, 1.0)
        poly = self._x_polynomial()
        anti = np.concatenate(([0.0], poly / np.arange(1, poly.size + 1)))
        out = np.polyval(anti[::-1], x)
        return out if np.ndim(out) else float(out)

    def _x_polynomial(self) -> np.ndarray:
        """Monomial coefficients of ``1 + sum coeffs * L`` in rescaled x."""
        coeffs = monomial_coefficients(self.order)
        poly = np.zeros(self.order + 1)
        poly[0] = 1.0
        for k in range(1, self.order + 1):
            c = coeffs[k]
            poly[: c.size] += self.coeffs[k - 1] * c
        return poly

    def power_moment(self, m: int, up_to: float | None = None) -> float:
        """Exact ``int theta^m f(theta) dtheta`` up to ``up_to`` (default: all)."""
        lo, hi = self.support
        width = hi - lo
        x_hi = 1.0 if up_to is None else float(np.clip((up_to - lo) / width, 0.0, 1.0))
        poly = self._x_polynomial()
        # theta^m = (lo + width*x)^m expanded in powers of x
        from math import comb

        total = 0.0
        for j in range(m + 1):
            weight = comb(m, j) * lo ** (m - j) * width**j
            # int_0^{x_hi} x^{j} * poly(x) dx
            seg = sum(poly[i] * x_hi ** (j + i + 1) / (j + i + 1) for i in range(poly.size))
            total += weight * seg
        return total

    def grid(self) -> np.ndarray:
        lo, hi = self.support
        return np.linspace(lo, hi, self.grid_size)

    def exact_min(self) -> tuple[float, float]:
        """Global minimum of the density over its support, found from the
        derivative roots of the underlying polynomial (in rescaled units)."""
        x_min, val = series_min_on_unit(self.coeffs)
        lo, hi = self.support
        return lo + (hi - lo) * x_min, val / (hi - lo)

    def values_on_grid(self) -> np.ndarray:
        return np.asarray(self.pdf(self.grid()))

    def min_on_grid(self) -> float:
        return float(np.min(self.values_on_grid()))
