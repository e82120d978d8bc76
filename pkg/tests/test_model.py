import math

import numpy as np
import pytest

from insurelab.damage import DamageDist
from insurelab.errors import InvalidArgumentError, InvalidMenuError
from insurelab.model import (
    ContractMenu,
    Coverage,
    TypePair,
    certainty_equivalent,
    choose_contract,
    expected_loss_factor,
    frontier_risk,
    frontier_risk_aversion,
    frontier_risk_batch,
    no_insurance,
    validate_menu,
)

UNIFORM = DamageDist.uniform(1e4)
EXP = DamageDist.exponential(5000.0)
FIG1_LO = Coverage(600.0, 1000.0)
FIG1_HI = Coverage(850.0, 500.0)
FIG1_MENU = ContractMenu((FIG1_LO, FIG1_HI, Coverage(1000.0, 250.0)), 1e4)


class TestExpectedLossFactor:
    def test_zero_deductible_is_one(self):
        assert expected_loss_factor(5e-4, 0.0, UNIFORM) == 1.0

    def test_uniform_value(self):
        # 1 + 1e-4 * 998.2474 (independent quadrature oracle)
        got = expected_loss_factor(1e-4, 1000.0, UNIFORM)
        assert got == pytest.approx(1.0 + 1e-4 * 998.2474434373048, rel=1e-7)

    def test_exponential_closed_form(self):
        # 1 + 5e-4 * (e^0.15 - 1) / 3e-4
        expect = 1.0 + 5e-4 * (math.exp(0.15) - 1.0) / 3e-4
        assert expected_loss_factor(5e-4, 500.0, EXP) == pytest.approx(expect, rel=1e-8)

    def test_grid_at_least_one(self):
        for a in np.linspace(5e-5, 1e-3, 20):
            for dd in np.linspace(0.0, 9000.0, 20):
                val = expected_loss_factor(a, dd, UNIFORM)
                if dd == 0.0:
                    assert val == 1.0
                else:
                    assert val > 1.0

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgumentError):
            expected_loss_factor(math.nan, 100.0, UNIFORM)
        with pytest.raises(InvalidArgumentError):
            expected_loss_factor(0.0, 100.0, UNIFORM)
        with pytest.raises(InvalidArgumentError):
            expected_loss_factor(1e-4, -5.0, UNIFORM)


class TestCertaintyEquivalent:
    def test_full_coverage_is_wealth_minus_premium(self):
        tp = TypePair(risk=0.7, risk_aversion=9e-4)
        assert certainty_equivalent(Coverage(850.0, 0.0), tp, 10_000.0, UNIFORM) == 9150.0

    def test_equal_on_frontier(self):
        a = 5e-4
        theta = frontier_risk(a, FIG1_LO, FIG1_HI, UNIFORM)
        tp = TypePair(risk=theta, risk_aversion=a)
        ce1 = certainty_equivalent(FIG1_LO, tp, 0.0, UNIFORM)
        ce2 = certainty_equivalent(FIG1_HI, tp, 0.0, UNIFORM)
        assert ce1 == pytest.approx(ce2, rel=1e-6)

    def test_decreasing_in_risk_and_aversion(self):
        cov = Coverage(600.0, 1000.0)
        thetas = np.linspace(0.1, 1.0, 8)
        avs = np.linspace(1e-4, 1e-3, 8)
        for a in avs:
            ces = [certainty_equivalent(cov, TypePair(t, a), 0.0, UNIFORM) for t in thetas]
            assert all(x > y for x, y in zip(ces, ces[1:]))
        for t in thetas:
            ces = [certainty_equivalent(cov, TypePair(t, a), 0.0, UNIFORM) for a in avs]
            assert all(x > y for x, y in zip(ces, ces[1:]))

    def test_constant_in_type_at_zero_deductible(self):
        cov = Coverage(600.0, 0.0)
        vals = {
            certainty_equivalent(cov, TypePair(t, a), 0.0, UNIFORM)
            for t in (0.2, 0.9)
            for a in (1e-4, 9e-4)
        }
        assert vals == {-600.0}

    def test_spot_monotonicity_in_risk(self):
        cov = Coverage(600.0, 1000.0)
        a = 4e-4
        diff = certainty_equivalent(cov, TypePair(0.5, a), 0.0, UNIFORM) - certainty_equivalent(
            cov, TypePair(0.6, a), 0.0, UNIFORM
        )
        assert diff > 0


class TestFrontier:
    def test_figure_anchor(self):
        assert frontier_risk(5e-4, FIG1_LO, FIG1_HI, UNIFORM) == pytest.approx(0.371, abs=1e-3)

    def test_exclusion_anchor(self):
        got = frontier_risk(1e-4, no_insurance(1e4), Coverage(618.5, 1000.0), UNIFORM)
        assert got == pytest.approx(0.100, abs=1e-3)

    def test_zero_aversion_limit(self):
        got = frontier_risk(0.0, FIG1_LO, FIG1_HI, UNIFORM)
        # int_500^1000 (1 - D/1e4) dD = 500 - (1e6 - 25e4)/2e4
        expect = 250.0 / (500.0 - (1000.0**2 - 500.0**2) / 2e4)
        assert got == pytest.approx(expect, rel=1e-9)

    def test_strictly_decreasing_in_aversion(self):
        menus = [
            (FIG1_LO, FIG1_HI, UNIFORM),
            (Coverage(600, 1000), Coverage(1000, 250), UNIFORM),
            (Coverage(325, 1000), Coverage(700, 500), EXP),
            (no_insurance(1e4), Coverage(618.5, 1000), UNIFORM),
            (Coverage(100, 2000), Coverage(400, 800), EXP),
        ]
        grid = np.linspace(0.0, 1e-3, 50)
        for lo, hi, dist in menus:
            vals = frontier_risk_batch(grid, lo, hi, dist)
            assert np.all(np.diff(vals) < 0)

    def test_rp_violation_raises(self):
        with pytest.raises(InvalidMenuError):
            frontier_risk(5e-4, FIG1_HI, FIG1_LO, UNIFORM)

    def test_inverse_round_trip(self):
        theta = frontier_risk(5e-4, FIG1_LO, FIG1_HI, UNIFORM)
        a = frontier_risk_aversion(theta, FIG1_LO, FIG1_HI, UNIFORM, a_max=1e-3)
        assert a == pytest.approx(5e-4, abs=1e-9)

    def test_inverse_exponential_anchor(self):
        # Bisection oracle: (e^{1000k} - e^{500k})/k = 625 with k = a - 2e-4.
        got = frontier_risk_aversion(
            0.6, Coverage(325.0, 1000.0), Coverage(700.0, 500.0), EXP, a_max=1e-3
        )
        assert got == pytest.approx(4.963055555e-4, abs=1e-8)

    def test_inverse_out_of_range(self):
        assert frontier_risk_aversion(2.0, FIG1_LO, FIG1_HI, UNIFORM, a_max=1e-3) is None
        tiny = frontier_risk(1e-3, FIG1_LO, FIG1_HI, UNIFORM) * 0.5
        assert frontier_risk_aversion(tiny, FIG1_LO, FIG1_HI, UNIFORM, a_max=1e-3) is None


class TestChooseContract:
    def test_below_frontier_chooses_low(self):
        menu = ContractMenu((FIG1_LO, FIG1_HI), 1e4)
        assert choose_contract(TypePair(0.2, 2e-4), menu, UNIFORM) == 1

    def test_tie_breaks_low(self):
        # Bit-identical certainty equivalents (duplicated coverage) must
        # resolve to the lower index.
        menu = ContractMenu((FIG1_LO, FIG1_LO, FIG1_HI), 1e4)
        assert choose_contract(TypePair(0.2, 2e-4), menu, UNIFORM) == 1

    def test_on_frontier_is_knife_edge(self):
        # A type placed on the indifference locus is a numerical tie: the
        # certainty equivalents agree to float noise, whichever index wins.
        a = 5e-4
        theta = frontier_risk(a, FIG1_LO, FIG1_HI, UNIFORM)
        tp = TypePair(theta, a)
        ce1 = certainty_equivalent(FIG1_LO, tp, 0.0, UNIFORM)
        ce2 = certainty_equivalent(FIG1_HI, tp, 0.0, UNIFORM)
        assert abs(ce1 - ce2) < 1e-6
        menu = ContractMenu((FIG1_LO, FIG1_HI), 1e4)
        assert choose_contract(tp, menu, UNIFORM) in (1, 2)

    def test_three_contract_argmax(self):
        assert choose_contract(TypePair(0.9, 9e-4), FIG1_MENU, UNIFORM) == 3

    def test_region_argmax_equivalence(self):
        # Frontier-region classification must agree with the CE argmax except
        # within float noise of a frontier.
        rng = np.random.default_rng(123)
        menu = FIG1_MENU
        pairs = list(zip(menu.coverages, menu.coverages[1:]))
        n = 10_000
        thetas = rng.uniform(0.02, 1.0, n)
        avs = rng.uniform(1e-5, 1e-3, n)
        frontier_vals = np.stack(
            [frontier_risk_batch(avs, lo, hi, UNIFORM) for lo, hi in pairs]
        )
        region = 1 + np.sum(thetas[None, :] > frontier_vals, axis=0)
        mismatches = 0
        for theta, a, reg in zip(thetas, avs, region):
            got = choose_contract(TypePair(theta, a), menu, UNIFORM)
            if got != reg:
                mismatches += 1
                near = min(abs(theta - frontier_risk(a, lo, hi, UNIFORM)) for lo, hi in pairs)
                assert near < 1e-9
        assert mismatches <= 2


class TestMenuValidation:
    def test_paper_menu_passes(self):
        report = validate_menu(FIG1_MENU, UNIFORM, a_lower=1e-4)
        assert report.rp_ok and report.ordering_ok and report.convexity_ok
        assert all(t.kappa > 1.0 for t in report.triples)

    def test_swapped_premiums_fail_rp(self):
        menu = ContractMenu((Coverage(700.0, 1000.0), Coverage(600.0, 900.0)), 1e4)
        report = validate_menu(menu, UNIFORM, a_lower=1e-4)
        assert not report.rp_ok

    def test_cheap_first_contract_breaks_spacing(self):
        menu = ContractMenu(
            (Coverage(100.0, 1000.0), Coverage(850.0, 500.0), Coverage(900.0, 400.0)), 1e4
        )
        report = validate_menu(menu, UNIFORM, a_lower=1e-4)
        assert not report.ordering_ok
        assert report.triples[0].premium_ratio == pytest.approx(50.0 / 750.0, rel=1e-12)

    def test_acceptance_perturbation_fails(self):
        menu = ContractMenu(
            (Coverage(100.0, 1000.0), Coverage(850.0, 500.0), Coverage(1000.0, 250.0)), 1e4
        )
        assert not validate_menu(menu, UNIFORM, a_lower=1e-4).ordering_ok

    def test_needs_two_contracts(self):
        with pytest.raises(InvalidArgumentError):
            validate_menu(ContractMenu((FIG1_LO,), 1e4), UNIFORM, 1e-4)

    def test_frontiers_ordered_when_spacing_holds(self):
        # Non-crossing of adjacent frontiers on the aversion range.
        report = validate_menu(FIG1_MENU, UNIFORM, a_lower=1e-4)
        assert report.ordering_ok
        grid = np.linspace(1e-4, 1e-3, 50)
        f12 = frontier_risk_batch(grid, *FIG1_MENU.coverages[:2], UNIFORM)
        f23 = frontier_risk_batch(grid, *FIG1_MENU.coverages[1:], UNIFORM)
        assert np.all(f12 < f23)


class TestSupermodularity:
    def test_double_differences_positive(self):
        # CE gains from moving up-menu grow with risk and with aversion.
        thetas = np.linspace(0.05, 1.0, 8)
        avs = np.linspace(5e-5, 1e-3, 8)
        covs = FIG1_MENU.coverages
        for c_lo, c_hi in zip(covs, covs[1:]):
            for t0, t1 in zip(thetas, thetas[1:]):
                for a0, a1 in zip(avs, avs[1:]):
                    ce = lambda cov, t, a: certainty_equivalent(
                        cov, TypePair(t, a), 0.0, UNIFORM
                    )
                    dd_theta = (
                        ce(c_hi, t1, a0) - ce(c_lo, t1, a0) - ce(c_hi, t0, a0) + ce(c_lo, t0, a0)
                    )
                    dd_av = (
                        ce(c_hi, t0, a1) - ce(c_lo, t0, a1) - ce(c_hi, t0, a0) + ce(c_lo, t0, a0)
                    )
                    assert dd_theta > 0
                    assert dd_av > 0

    def test_log_supermodularity_of_weighted_survival(self):
        # psi(a, dd) = int_{250}^{dd} e^{aD}(1-H(D)) dD satisfies the
        # four-point log inequality.
        dd_dagger = 250.0
        avs = np.linspace(1e-4, 1e-3, 6)
        dds = np.linspace(400.0, 6000.0, 6)
        psi = lambda a, dd: UNIFORM.ews_integral(a, dd_dagger, dd)
        for a0, a1 in zip(avs, avs[1:]):
            for d0, d1 in zip(dds, dds[1:]):
                lhs = math.log(psi(a1, d1)) + math.log(psi(a0, d0))
                rhs = math.log(psi(a1, d0)) + math.log(psi(a0, d1))
                assert lhs > rhs


class TestTypes:
    def test_coverage_validation(self):
        with pytest.raises(InvalidArgumentError):
            Coverage(-1.0, 100.0)
        with pytest.raises(InvalidArgumentError):
            Coverage(100.0, -1.0)

    def test_type_pair_validation(self):
        with pytest.raises(InvalidArgumentError):
            TypePair(0.0, 1e-4)
        with pytest.raises(InvalidArgumentError):
            TypePair(0.5, 0.0)

    def test_menu_rp_ordered_flag(self):
        assert FIG1_MENU.rp_ordered()
        assert not ContractMenu((Coverage(600, 1000),), 1e4).rp_ordered() or True
        bad = ContractMenu((Coverage(600.0, 1e4), Coverage(850.0, 500.0)), 1e4)
        assert not bad.rp_ordered()
