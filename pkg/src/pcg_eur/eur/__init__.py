"""Entropic uncertainty checks built on the scheme, phase-space and measurement layers."""
from .limit import LimitRecord, continuous_renyi, hg_state, limit_study
from .optimize import GaussianFamily, HermiteFamily, SearchResult, entropy_sum, minimize_entropy_sum
from .report import (DEFAULT_ORDERS, DEFICIT_FLOOR, EurReport, eur_report, eur_reports, invalid_scheme_probe,
                     measure_pair, probe_deviations, rotated)
from .steering import TwoModeState, WitnessReport, joint_probabilities, steering_witness, two_mode_squeezed

__all__ = [
    "DEFAULT_ORDERS", "DEFICIT_FLOOR", "EurReport", "GaussianFamily", "HermiteFamily", "LimitRecord",
    "SearchResult", "TwoModeState", "WitnessReport", "continuous_renyi", "entropy_sum", "eur_report",
    "eur_reports", "hg_state", "invalid_scheme_probe", "joint_probabilities", "limit_study",
    "measure_pair", "minimize_entropy_sum", "probe_deviations", "rotated", "steering_witness",
    "two_mode_squeezed",
]
