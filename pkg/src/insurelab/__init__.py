"""Insurance contract choice under two-dimensional private information:
synthetic data generation, three-step nonparametric estimation, and
brute-force oracles for verifying every recoverable quantity."""

from .damage import DamageDist
from .dgp import DgpConfig, InsureeRecord, LinearMenuRule, apply_truncation, simulate_dataset
from .legendre import LegendreDensity, shifted_legendre
from .model import (
    ContractMenu,
    Coverage,
    TypePair,
    certainty_equivalent,
    choose_contract,
    expected_loss_factor,
    frontier_risk,
    frontier_risk_aversion,
    health_certainty_equivalent,
    no_insurance,
    validate_menu,
)
from .moments import MomentSet, factorial_moments, moment_order_rule
from .pipeline import EstimatorConfig, mc_study, run_three_step

__all__ = [
    "ContractMenu",
    "Coverage",
    "DamageDist",
    "DgpConfig",
    "EstimatorConfig",
    "InsureeRecord",
    "LegendreDensity",
    "LinearMenuRule",
    "MomentSet",
    "TypePair",
    "apply_truncation",
    "certainty_equivalent",
    "choose_contract",
    "expected_loss_factor",
    "factorial_moments",
    "frontier_risk",
    "frontier_risk_aversion",
    "health_certainty_equivalent",
    "mc_study",
    "moment_order_rule",
    "no_insurance",
    "run_three_step",
    "shifted_legendre",
    "simulate_dataset",
    "validate_menu",
]
