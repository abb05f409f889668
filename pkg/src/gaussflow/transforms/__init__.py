"""Change-of-variable frames: pressure, Legendre dual, rescaled profile and hodograph."""

from ._common import Residual, TransformFault
from .hodograph import (
    HodographPatch,
    LinearizedCoefficients,
    PressureEvaluator,
    assemble_Htilde,
    boundary_drift,
    hodograph_solve,
    linearized_coefficients,
    patch_pair,
    residual_hodograph,
)
from .legendre import LegendreField, PolarGrid, discrete_conjugate, legendre_transform, residual_dual
from .pressure import PressureField, from_pressure, pressure_speed, residual_pressure, to_pressure
from .zeta import RescaledProfile, rescaled_zeta, residual_zeta

__all__ = [
    "HodographPatch", "LegendreField", "LinearizedCoefficients", "PolarGrid", "PressureEvaluator",
    "PressureField", "RescaledProfile", "Residual", "TransformFault", "assemble_Htilde", "boundary_drift",
    "discrete_conjugate", "from_pressure", "hodograph_solve", "legendre_transform", "linearized_coefficients",
    "patch_pair", "pressure_speed", "rescaled_zeta", "residual_dual", "residual_hodograph", "residual_pressure",
    "residual_zeta", "to_pressure",
]
