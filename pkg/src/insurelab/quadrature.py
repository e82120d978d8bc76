"""Adaptive Simpson integration with an explicit error estimate.

This is the reference integrator used by the brute-force oracles and by
scalar model evaluations.  Vectorised hot paths (see ``damage``) use fixed
Gauss-Legendre panels instead and are tested against this routine.
"""

import math

from .errors import InvalidArgumentError, NumericFailure

# Hard cap on interval subdivisions before declaring non-convergence.
MAX_INTERVALS = 10**6


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a, b, tol=1e-10):
    """Integrate ``f`` on ``[a, b]`` to absolute tolerance ``tol``.

    Returns ``(value, error_estimate)``.  Raises :class:`NumericFailure`
    (with the achieved tolerance attached) if the interval budget runs out.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidArgumentError(f"non-finite integration bounds [{a}, {b}]")
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = adaptive_simpson(f, b, a, tol)
        return -value, err

    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    # Stack entries: (a, fa, m, fm, b, fb, whole, tol)
    stack = [(a, fa, m, fm, b, fb, whole, tol)]
    total = 0.0
    err_total = 0.0
    intervals = 0
    while stack:
        a0, fa0, m0, fm0, b0, fb0, whole0, tol0 = stack.pop()
        intervals += 1
        if intervals > MAX_INTERVALS:
            achieved = err_total + abs(whole0)
            raise NumericFailure(
                f"adaptive Simpson did not converge to {tol:g} "
                f"(achieved about {achieved:g})",
                achieved=achieved,
            )
        lm, flm, left = _simpson(f, a0, fa0, m0, fm0)
        rm, frm, right = _simpson(f, m0, fm0, b0, fb0)
        delta = left + right - whole0
        if abs(delta) <= 15.0 * tol0 or (b0 - a0) < 1e-14 * max(abs(a), abs(b), 1.0):
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
        else:
            half = 0.5 * tol0
            stack.append((a0, fa0, lm, flm, m0, fm0, left, half))
            stack.append((m0, fm0, rm, frm, b0, fb0, right, half))
    return total, err_total
