import numpy as np
import pytest

from insurelab.errors import InvalidArgumentError
from insurelab.legendre import (
    LegendreDensity,
    monomial_coefficients,
    power_moment_matrix,
    shifted_legendre,
)


def test_degree_zero_is_one():
    xs = np.linspace(0, 1, 11)
    assert np.all(shifted_legendre(0, xs) == 1.0)


def test_degree_one_values():
    assert shifted_legendre(1, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert shifted_legendre(1, 1.0) == pytest.approx(np.sqrt(3.0), rel=1e-14)


def test_orthonormality_by_quadrature():
    from scipy.integrate import simpson

    xs = np.linspace(0, 1, 10_001)
    for m in range(5):
        for k in range(m + 1):
            prod = shifted_legendre(m, xs) * shifted_legendre(k, xs)
            integral = simpson(prod, x=xs)
            assert integral == pytest.approx(1.0 if m == k else 0.0, abs=1e-8)


def test_square_integral_near_one():
    from scipy.integrate import simpson

    xs = np.linspace(0, 1, 10_001)
    val = simpson(shifted_legendre(2, xs) ** 2, x=xs)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_zero_mean_above_degree_zero():
    from scipy.integrate import simpson

    xs = np.linspace(0, 1, 10_001)
    for m in range(1, 6):
        assert simpson(shifted_legendre(m, xs), x=xs) == pytest.approx(0.0, abs=1e-8)


def test_domain_validation():
    with pytest.raises(InvalidArgumentError):
        shifted_legendre(2, 1.5)
    with pytest.raises(InvalidArgumentError):
        shifted_legendre(-1, 0.5)


def test_monomial_coefficients_match_recurrence():
    xs = np.linspace(0, 1, 7)
    coeffs = monomial_coefficients(5)
    for m in range(6):
        direct = shifted_legendre(m, xs)
        poly = np.polyval(coeffs[m][::-1], xs)
        np.testing.assert_allclose(poly, direct, rtol=1e-10, atol=1e-12)


def test_power_moment_matrix_lower_triangular():
    b, A = power_moment_matrix(4)
    np.testing.assert_allclose(b, [1 / 2, 1 / 3, 1 / 4, 1 / 5], rtol=1e-14)
    assert abs(A[0, 2]) < 1e-12 and abs(A[1, 3]) < 1e-12
    # A[0, 0] = int x L_1 = sqrt(3) * (2/3 - 1/2)
    assert A[0, 0] == pytest.approx(np.sqrt(3.0) / 6.0, rel=1e-12)


class TestLegendreDensity:
    def test_integrates_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            dens = LegendreDensity(support=(0.0, 1.0), coeffs=rng.normal(0, 0.2, 4))
            xs = np.linspace(0, 1, 40_001)
            assert np.trapezoid(dens.pdf(xs), xs) == pytest.approx(1.0, abs=1e-8)
            assert dens.cdf(1.0) == pytest.approx(1.0, rel=1e-12)

    def test_rescaled_support(self):
        dens = LegendreDensity(support=(0.2, 0.7), coeffs=np.zeros(3))
        assert dens.pdf(0.45) == pytest.approx(2.0)
        assert dens.pdf(0.1) == 0.0
        assert dens.pdf(0.9) == 0.0
        assert dens.cdf(0.7) == pytest.approx(1.0)

    def test_power_moment_exact(self):
        # Flat density on [0, 1]: E[theta^m] = 1/(m+1).
        dens = LegendreDensity(support=(0.0, 1.0), coeffs=np.zeros(2))
        for m in range(1, 5):
            assert dens.power_moment(m) == pytest.approx(1.0 / (m + 1), rel=1e-12)

    def test_partial_moment_matches_quadrature(self):
        dens = LegendreDensity(support=(0.0, 1.0), coeffs=[0.1, -0.05, 0.02])
        xs = np.linspace(0, 0.4, 20_001)
        quad = np.trapezoid(xs**2 * dens.pdf(xs), xs)
        assert dens.power_moment(2, up_to=0.4) == pytest.approx(quad, abs=1e-8)

    def test_beta23_projection_coefficient(self):
        # Beta(2,3) has mean 0.4 -> lambda_1 = sqrt(3) * (2*0.4 - 1).
        from insurelab.legendre import power_moment_matrix

        b, A = power_moment_matrix(4)
        beta_moments = np.array([0.4, 0.2, 4 / 35, 5 / 70])
        lam = np.linalg.solve(A, beta_moments - b)
        assert lam[0] == pytest.approx(np.sqrt(3.0) * (2 * 0.4 - 1.0), abs=1e-8)
        # Beta(2,3) is cubic, so the degree-4 coefficient vanishes.
        assert lam[3] == pytest.approx(0.0, abs=1e-10)

    def test_bad_support(self):
        with pytest.raises(InvalidArgumentError):
            LegendreDensity(support=(0.5, 0.5), coeffs=[0.0])
