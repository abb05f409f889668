"""Numerical toolkit for Gauss curvature flow of convex surfaces with flat sides."""

__version__ = "0.1.0"

from .grids import GraphGrid, RadialProfile, sample_radial_to_grid
from .interface import (
    InterfaceState,
    estimate_Tstar,
    extract_interface,
    sphere_cap_height,
    sphere_exact_radius,
    sphere_extinction_time,
)
from .params import (
    FlowDomainError,
    FlowParams,
    RegularityClass,
    classify_g_regularity,
    classify_v_regularity,
    derive_exponents,
)
from .solver import StepFault, Trajectory, rhs_graph, rhs_radial, run_flow, stable_dt, step_explicit

__all__ = [
    "FlowDomainError", "FlowParams", "GraphGrid", "InterfaceState", "RadialProfile", "RegularityClass",
    "StepFault", "Trajectory", "classify_g_regularity", "classify_v_regularity", "derive_exponents",
    "estimate_Tstar", "extract_interface", "rhs_graph", "rhs_radial", "run_flow", "sample_radial_to_grid",
    "sphere_cap_height", "sphere_exact_radius", "sphere_extinction_time", "stable_dt", "step_explicit",
    "__version__",
]
