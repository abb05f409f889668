"""Pressure representation ``g = ((sigma+1)/sigma * v)^(sigma/(sigma+1))``.

Near the interface ``v ~ dist^(1 + 1/sigma)`` while ``g ~ dist``, so the
pressure is the variable in which the free boundary looks non-degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import RadialProfile, State
from ..params import FlowParams
from ._common import Residual, require_sigma


@dataclass
class PressureField:
    grid: State
    sigma_p: float

    @property
    def g(self) -> np.ndarray:
        return self.grid.values

    @property
    def time(self) -> float:
        return self.grid.time

    @property
    def spacing(self) -> float:
        return self.grid.spacing


def to_pressure(state: State, params: FlowParams) -> PressureField:
    sigma = require_sigma(params)
    v = state.values
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        bad = tuple(int(i) for i in np.argwhere(~(v >= 0))[0])
        raise ValueError(f"height must be finite and nonnegative (node {bad})")
    g = ((sigma + 1.0) / sigma * v) ** (sigma / (sigma + 1.0))
    return PressureField(state.with_values(g), sigma)


def from_pressure(gfield: PressureField, params: FlowParams) -> State:
    sigma = require_sigma(params)
    g = gfield.g
    if np.any(g < 0):
        raise ValueError("pressure must be nonnegative")
    v = sigma / (sigma + 1.0) * g ** ((sigma + 1.0) / sigma)
    return gfield.grid.with_values(v)


def height_derivatives_from_pressure(g, g_i, g_ij, sigma: float):
    """Chain rule from pressure derivatives to height derivatives.

    ``g_i`` has shape (..., n), ``g_ij`` shape (..., n, n).  Returns ``(v_i, v_ij)``.
    """
    g = np.asarray(g, dtype=float)
    w = g ** (1.0 / sigma)
    v_i = w[..., None] * g_i
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = g ** (1.0 / sigma - 1.0) / sigma
    v_ij = w[..., None, None] * g_ij + w1[..., None, None] * g_i[..., :, None] * g_i[..., None, :]
    return v_i, v_ij


# ---------------------------------------------------------------------------
# spatial expression and residual


def _radial_pressure_terms(gfield: PressureField, params: FlowParams):
    g = gfield.g
    dr = gfield.spacing
    N = g.size - 1
    rho = np.arange(N + 1) * dr
    g_r = np.full(N + 1, np.nan)
    g_rr = np.full(N + 1, np.nan)
    g_r[1:N] = (g[2:] - g[:-2]) / (2 * dr)
    g_rr[1:N] = (g[2:] - 2 * g[1:N] + g[:-2]) / dr**2
    g_r[0] = 0.0
    g_rr[0] = 2 * (g[1] - g[0]) / dr**2
    with np.errstate(divide="ignore", invalid="ignore"):
        tang = np.where(rho > 0, g_r / np.where(rho > 0, rho, 1.0), g_rr)
    sigma = gfield.sigma_p
    # g * det(D^2 g + g^{-1} Dg (x) Dg / sigma): radial eigenvalue times n-1 tangential ones
    gdet = (g * g_rr + g_r**2 / sigma) * tang ** (params.n - 1)
    grad_sq = g_r**2
    return gdet, grad_sq


def _cartesian_pressure_terms(gfield: PressureField, params: FlowParams):
    g = gfield.g
    dy = gfield.spacing
    sigma = gfield.sigma_p
    gdet = np.full(g.shape, np.nan)
    grad_sq = np.full(g.shape, np.nan)
    c = g[1:-1, 1:-1]
    g1 = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2 * dy)
    g2 = (g[1:-1, 2:] - g[1:-1, :-2]) / (2 * dy)
    g11 = (g[2:, 1:-1] - 2 * c + g[:-2, 1:-1]) / dy**2
    g22 = (g[1:-1, 2:] - 2 * c + g[1:-1, :-2]) / dy**2
    g12 = (g[2:, 2:] - g[2:, :-2] - g[:-2, 2:] + g[:-2, :-2]) / (4 * dy**2)
    # g * det(M) with M = D^2 g + Dg (x) Dg / (sigma g), multiplied through by g
    a = c * g11 + g1 * g1 / sigma
    b = c * g22 + g2 * g2 / sigma
    m = c * g12 + g1 * g2 / sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        gdet[1:-1, 1:-1] = (a * b - m * m) / c
    grad_sq[1:-1, 1:-1] = g1**2 + g2**2
    return gdet, grad_sq


def pressure_speed(gfield: PressureField, params: FlowParams) -> np.ndarray:
    """Right-hand side of the pressure equation by central differences (NaN off-stencil)."""
    if isinstance(gfield.grid, RadialProfile):
        gdet, grad_sq = _radial_pressure_terms(gfield, params)
    else:
        gdet, grad_sq = _cartesian_pressure_terms(gfield, params)
    g = gfield.g
    sigma = gfield.sigma_p
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = np.maximum(gdet, 0.0) ** params.p / (1.0 + g ** (2.0 / sigma) * grad_sq) ** params.speed_exponent
    out[np.isnan(gdet)] = np.nan
    return out


def residual_pressure(gfield: PressureField, g_t: np.ndarray, params: FlowParams,
                      delta_res: float | None = None) -> Residual:
    """``g_t`` minus the pressure-equation right-hand side on ``{g > delta_res}``.

    ``delta_res`` defaults to five grid spacings; skipped nodes are NaN.
    """
    require_sigma(params)
    delta = 5.0 * gfield.spacing if delta_res is None else delta_res
    speed = pressure_speed(gfield, params)
    mask = (gfield.g > delta) & np.isfinite(speed)
    out = np.full(gfield.g.shape, np.nan)
    out[mask] = np.asarray(g_t)[mask] - speed[mask]
    skipped = int(np.count_nonzero(~mask))
    return Residual(out, mask, skipped)
