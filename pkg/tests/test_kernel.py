import numpy as np
import pytest

from insurelab.errors import InsufficientDataError
from insurelab.kernel import KernelSpec, kernel_regress, local_weights, silverman_bandwidth


def test_constant_response():
    rng = np.random.default_rng(5)
    xs = rng.uniform(100, 200, 500)
    ys = np.full(500, 3.7)
    for x0 in (110.0, 150.0, 190.0):
        assert kernel_regress(xs, ys, x0).value == pytest.approx(3.7, rel=1e-12)


def test_identity_regression_interior():
    rng = np.random.default_rng(6)
    xs = rng.uniform(100, 200, 100_000)
    fit = kernel_regress(xs, xs, 150.0)
    assert not fit.extrapolated
    assert fit.value == pytest.approx(150.0, abs=0.5)


def test_extrapolation_flagged_and_clamped():
    xs = np.linspace(0, 1, 50)
    ys = xs**2
    fit = kernel_regress(xs, ys, 2.0)
    assert fit.extrapolated
    inside = kernel_regress(xs, ys, 1.0)
    assert fit.value == pytest.approx(inside.value, rel=1e-12)


def test_bandwidth_scaling_with_n():
    rng = np.random.default_rng(7)
    xs = rng.normal(0, 2.0, 4000)
    doubled = np.concatenate([xs, xs])  # identical sd, 2n points
    ratio = silverman_bandwidth(doubled) / silverman_bandwidth(xs)
    assert ratio == pytest.approx(2 ** (-1 / 5), abs=1e-12)


def test_explicit_bandwidth_override():
    xs = np.array([0.0, 1.0, 2.0])
    ys = np.array([0.0, 1.0, 4.0])
    wide = kernel_regress(xs, ys, 1.0, KernelSpec(bandwidth=100.0))
    assert wide.value == pytest.approx(ys.mean(), rel=1e-4)


def test_local_weights_effective_size():
    xs = np.linspace(0, 1, 1000)
    w, n_eff = local_weights(xs, 0.5, KernelSpec(bandwidth=0.05))
    assert 0 < n_eff < 1000
    assert w.argmax() == 499 or w.argmax() == 500


def test_empty_input():
    with pytest.raises(InsufficientDataError):
        kernel_regress([], [], 0.5)
