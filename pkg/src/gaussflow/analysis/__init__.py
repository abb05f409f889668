"""Fits, weighted Hölder norms, non-degeneracy checks and reports."""

from .conditions import (
    check_degenerate_operator_hypotheses,
    check_initial_conditions,
    check_matrix_pinch,
    check_transversality,
)
from .fits import ExponentFit, FitError, fit_power_law
from .holder import HolderReport, holder_norm_c2alpha_mu, holder_norm_higher
from .intermediate import intermediate_estimate_sup
from .metric import MuPoint, mu_distance
from .report import Check, ConditionReport, VerificationReport, write_report
from .suite import verify_trajectory

__all__ = [
    "Check", "ConditionReport", "ExponentFit", "FitError", "HolderReport", "MuPoint", "VerificationReport",
    "check_degenerate_operator_hypotheses", "check_initial_conditions", "check_matrix_pinch",
    "check_transversality", "fit_power_law", "holder_norm_c2alpha_mu", "holder_norm_higher",
    "intermediate_estimate_sup", "mu_distance", "verify_trajectory", "write_report",
]
