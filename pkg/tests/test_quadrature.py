import math

import numpy as np
import pytest

from insurelab.errors import InvalidArgumentError
from insurelab.quadrature import adaptive_simpson


def test_polynomial_exact():
    value, err = adaptive_simpson(lambda x: x, 0.0, 1.0, tol=1e-12)
    assert value == pytest.approx(0.5, abs=1e-12)
    assert err >= 0.0


def test_frontier_anchor_integral():
    # 0.371-anchor denominator, frozen from an independent quadrature oracle.
    f = lambda d: math.exp(5e-4 * d) * (1 - d / 1e4)
    value, _ = adaptive_simpson(f, 500.0, 1000.0, tol=1e-8)
    assert value == pytest.approx(673.9283371584766, abs=0.1)


def test_exclusion_anchor_integral():
    f = lambda d: math.exp(1e-4 * d) * (1 - d / 1e4)
    value, _ = adaptive_simpson(f, 0.0, 1000.0, tol=1e-8)
    assert value == pytest.approx(998.2474434373048, abs=0.1)


def test_oscillatory_against_closed_form():
    value, _ = adaptive_simpson(np.sin, 0.0, math.pi, tol=1e-10)
    assert value == pytest.approx(2.0, abs=1e-9)


def test_reversed_interval_negates():
    fwd, _ = adaptive_simpson(lambda x: x**2, 0.0, 2.0, tol=1e-10)
    rev, _ = adaptive_simpson(lambda x: x**2, 2.0, 0.0, tol=1e-10)
    assert rev == pytest.approx(-fwd, abs=1e-12)


def test_nonfinite_bounds_rejected():
    with pytest.raises(InvalidArgumentError):
        adaptive_simpson(lambda x: x, 0.0, math.inf)


def test_nonconvergence_reports_achieved_tolerance(monkeypatch):
    import insurelab.quadrature as quadrature
    from insurelab.errors import NumericFailure

    monkeypatch.setattr(quadrature, "MAX_INTERVALS", 4)
    with pytest.raises(NumericFailure) as err:
        quadrature.adaptive_simpson(lambda x: math.exp(10 * x), 0.0, 5.0, tol=1e-14)
    assert err.value.achieved is not None and err.value.achieved > 0
