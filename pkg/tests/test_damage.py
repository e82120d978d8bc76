import math

import numpy as np
import pytest

from insurelab.damage import DamageDist
from insurelab.errors import InvalidArgumentError


def closed_form_uniform(a, lo, hi, upper):
    """int e^{aD} (1 - D/upper) dD in closed form (independent oracle)."""
    hi = min(hi, upper)
    if hi <= lo:
        return 0.0
    if a == 0:
        return (hi - lo) - (hi**2 - lo**2) / (2 * upper)
    e = lambda d: math.exp(a * d)
    plain = (e(hi) - e(lo)) / a
    weighted = (e(hi) * (a * hi - 1) - e(lo) * (a * lo - 1)) / a**2
    return plain - weighted / upper


def closed_form_exponential(a, lo, hi, mean):
    k = a - 1.0 / mean
    if abs(k) < 1e-15:
        return hi - lo
    return (math.exp(k * hi) - math.exp(k * lo)) / k


class TestAnalyticKinds:
    def test_uniform_cdf_survival(self):
        u = DamageDist.uniform(1e4)
        assert u.cdf(0.0) == 0.0
        assert u.cdf(5000.0) == pytest.approx(0.5)
        assert u.survival(1e4) == 0.0
        assert u.survival(2e4) == 0.0

    def test_scalar_matches_closed_form(self):
        u = DamageDist.uniform(1e4)
        for a, lo, hi in [(5e-4, 500, 1000), (1e-4, 0, 1000), (1e-3, 0, 9000), (0.0, 250, 500)]:
            assert u.ews_integral(a, lo, hi) == pytest.approx(
                closed_form_uniform(a, lo, hi, 1e4), rel=1e-8
            )
        e = DamageDist.exponential(5000.0)
        for a, lo, hi in [(5e-4, 0, 500), (2e-4, 500, 1000), (0.0, 500, 1000)]:
            assert e.ews_integral(a, lo, hi) == pytest.approx(
                closed_form_exponential(a, lo, hi, 5000.0), rel=1e-8
            )

    def test_batch_matches_scalar(self):
        for dist in (DamageDist.uniform(1e4), DamageDist.exponential(5000.0)):
            grid = np.linspace(0.0, 1e-3, 17)
            batch = dist.ews_integral(grid, 500.0, 1000.0)
            scal = np.array([dist.ews_integral(a, 500.0, 1000.0) for a in grid])
            np.testing.assert_allclose(batch, scal, rtol=1e-10)
            batch_d = dist.dews_integral(grid, 500.0, 1000.0)
            scal_d = np.array([dist.dews_integral(a, 500.0, 1000.0) for a in grid])
            np.testing.assert_allclose(batch_d, scal_d, rtol=1e-9)

    def test_d_weighted_derivative_consistency(self):
        # dews is the a-derivative of ews; check by central difference.
        e = DamageDist.exponential(5000.0)
        a, h = 4e-4, 1e-8
        fd = (e.ews_integral(a + h, 500, 1000) - e.ews_integral(a - h, 500, 1000)) / (2 * h)
        assert e.dews_integral(a, 500, 1000) == pytest.approx(fd, rel=1e-5)

    def test_integration_beyond_support_truncates(self):
        u = DamageDist.uniform(1000.0)
        full = u.ews_integral(1e-4, 0.0, 1000.0)
        assert u.ews_integral(1e-4, 0.0, 5000.0) == pytest.approx(full, rel=1e-12)
        assert u.ews_integral(1e-4, 1000.0, 2000.0) == 0.0


class TestEmpirical:
    def test_single_point_step(self):
        d = DamageDist.empirical([750.0])
        assert d.cdf(749.0) == 0.0
        assert d.cdf(750.0) == 1.0
        assert d.survival(749.999) == 1.0

    def test_exact_integral_vs_plain_loop(self):
        # Independent oracle: naive per-segment loop with textbook formulas.
        rng = np.random.default_rng(4)
        sample = np.sort(rng.uniform(0, 1e4, size=400))
        d = DamageDist.empirical(sample)

        def loop_oracle(a, lo, hi):
            edges = [lo] + [s for s in sample if lo < s < hi] + [hi]
            total = 0.0
            for u, v in zip(edges, edges[1:]):
                surv = np.sum(sample > u) / sample.size
                if a == 0.0:
                    total += surv * (v - u)
                else:
                    total += surv * (math.exp(a * v) - math.exp(a * u)) / a
            return total

        for a, lo, hi in [(5e-4, 500, 1000), (0.0, 0, 5000), (2e-4, 100, 9000)]:
            assert d.ews_integral(a, lo, hi) == pytest.approx(
                loop_oracle(a, lo, hi), rel=1e-12
            )

    def test_empirical_converges_to_truth(self):
        rng = np.random.default_rng(11)
        d = DamageDist.empirical(rng.exponential(5000.0, size=200_000))
        truth = closed_form_exponential(5e-4, 500, 1000, 5000.0)
        assert d.ews_integral(5e-4, 500, 1000) == pytest.approx(truth, rel=0.02)

    def test_degenerate_sample_above_deductible(self):
        # All mass above the integration range: survival is 1 throughout.
        d = DamageDist.empirical([9000.0] * 5)
        got = d.ews_integral(3e-4, 500.0, 1000.0)
        expect = (math.exp(3e-4 * 1000) - math.exp(3e-4 * 500)) / 3e-4
        assert got == pytest.approx(expect, rel=1e-12)


class TestValidation:
    def test_bad_parameters(self):
        with pytest.raises(InvalidArgumentError):
            DamageDist.uniform(-1.0)
        with pytest.raises(InvalidArgumentError):
            DamageDist.exponential(0.0)
        with pytest.raises(InvalidArgumentError):
            DamageDist.empirical([])
        with pytest.raises(InvalidArgumentError):
            DamageDist.empirical([1.0, -2.0])

    def test_nonfinite_integral_arguments(self):
        u = DamageDist.uniform(1e4)
        with pytest.raises(InvalidArgumentError):
            u.ews_integral(math.nan, 0, 100)
        with pytest.raises(InvalidArgumentError):
            u.ews_integral(1e-4, 0, math.inf)

    def test_ppf_draw_roundtrip(self):
        e = DamageDist.exponential(5000.0)
        assert e.ppf(0.5) == pytest.approx(5000.0 * math.log(2.0))
        rng = np.random.default_rng(0)
        x = e.draw(rng, size=50_000)
        assert np.mean(x) == pytest.approx(5000.0, rel=0.05)
