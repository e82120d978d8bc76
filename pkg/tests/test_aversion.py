"""Instrument-variation density: formula wiring against oracle inputs."""

import numpy as np
import pytest

from insurelab.aversion import aversion_density, identified_range
from insurelab.dgp import DgpConfig
from insurelab.errors import DegenerateInstrumentError, DegenerateRegionError
from insurelab.oracle import (
    dews_closed_form,
    ews_closed_form,
    oracle_frontier,
    oracle_frontier_inverse,
    true_conditional_cdf,
    true_conditional_density,
)

CFG = DgpConfig(n=1, seed=0)


def oracle_maps(cfg):
    rule = cfg.menu_rule

    def frontier(a, z):
        return oracle_frontier(a, z, cfg)

    def dfrontier_da(a, z):
        num = dews_closed_form(cfg.damage, a, rule.dd2, rule.dd1)
        den = ews_closed_form(cfg.damage, a, rule.dd2, rule.dd1)
        return -frontier(a, z) * num / den

    def pr(theta, z):
        a_star = oracle_frontier_inverse(theta, z, cfg)
        if a_star is None:
            return 0.0
        if a_star >= cfg.a_scale:
            return 1.0
        return true_conditional_cdf(theta, a_star, cfg)

    return frontier, dfrontier_da, pr


class TestOracleWiring:
    def test_reproduces_true_density_at_marginal_mean(self):
        # The density identity itself, isolated from estimation noise.
        frontier, dfa, pr = oracle_maps(CFG)
        a_grid = np.linspace(0.0, 1e-3, 101)
        res = aversion_density(
            0.4, frontier, dfa, pr,
            a_grid=a_grid, z_range=(100.0, 200.0), h_z=0.25, a_support_max=1e-3,
        )
        assert res.normalized
        truth = np.array([true_conditional_density(0.4, a, CFG) for a in a_grid])
        mask = res.identified
        iae = np.trapezoid(np.abs(res.values[mask] - truth[mask]), a_grid[mask])
        assert iae <= 0.02

    def test_unnormalized_scale_is_right_on_partial_range(self):
        frontier, dfa, pr = oracle_maps(CFG)
        a_grid = np.linspace(0.0, 1e-3, 101)
        res = aversion_density(
            0.6, frontier, dfa, pr,
            a_grid=a_grid, z_range=(100.0, 200.0), h_z=0.25, a_support_max=1e-3,
        )
        assert not res.normalized
        truth = np.array([true_conditional_density(0.6, a, CFG) for a in a_grid])
        mask = res.identified & (a_grid > 0.05e-3) & (a_grid < res.a_max - 0.05e-3)
        rel = np.abs(res.values[mask] - truth[mask]) / truth[mask]
        assert np.median(rel) < 0.05

    def test_identified_ranges(self):
        frontier, _, _ = oracle_maps(CFG)
        a_min, a_max = identified_range(frontier, 0.4, (100.0, 200.0), 1e-3)
        assert a_min == 0.0
        assert a_max == pytest.approx(1e-3, rel=1e-9)
        a_min6, a_max6 = identified_range(frontier, 0.6, (100.0, 200.0), 1e-3)
        assert a_min6 == 0.0
        assert a_max6 == pytest.approx(4.963055555e-4, rel=1e-6)

    def test_chain_rule_identity(self):
        # -(d theta/d a)/(d theta/d z) equals the finite-difference slope of
        # the frontier inverse along the instrument.
        frontier, dfa, _ = oracle_maps(CFG)
        for theta_star, z in [(0.4, 130.0), (0.5, 115.0), (0.3, 150.0)]:
            a = oracle_frontier_inverse(theta_star, z, CFG)
            if a is None or a >= 1e-3:
                continue
            h = 1e-3  # instrument step
            ap = oracle_frontier_inverse(theta_star, z + h, CFG)
            am = oracle_frontier_inverse(theta_star, z - h, CFG)
            da_dz_fd = (ap - am) / (2 * h)
            hz = 1e-4
            dth_dz = (frontier(a, z + hz) - frontier(a, z - hz)) / (2 * hz)
            da_dz = -dth_dz / dfa(a, z)
            assert da_dz == pytest.approx(da_dz_fd, rel=1e-6)

    def test_monotone_inverse_along_instrument(self):
        vals = []
        for z in np.linspace(100.0, 160.0, 25):
            a = oracle_frontier_inverse(0.4, z, CFG)
            vals.append(np.inf if a is None else a)
        diffs = np.diff([v for v in vals if np.isfinite(v)])
        assert np.all(diffs < 0)

    def test_normalized_density_integrates_to_one(self):
        frontier, dfa, pr = oracle_maps(CFG)
        a_grid = np.linspace(0.0, 1e-3, 201)
        res = aversion_density(
            0.4, frontier, dfa, pr,
            a_grid=a_grid, z_range=(100.0, 200.0), h_z=0.25, a_support_max=1e-3,
        )
        mask = res.identified
        assert np.trapezoid(res.values[mask], a_grid[mask]) == pytest.approx(1.0, abs=1e-6)

    def test_degenerate_instrument_detected(self):
        flat_frontier = lambda a, z: 0.5 - 100.0 * a  # no z variation
        dfa = lambda a, z: -100.0
        pr = lambda theta, z: 0.5
        with pytest.raises((DegenerateInstrumentError, DegenerateRegionError)):
            aversion_density(
                0.4, flat_frontier, dfa, pr,
                a_grid=np.linspace(0, 1e-3, 11), z_range=(100.0, 200.0),
                h_z=1.0, a_support_max=1e-3,
            )
