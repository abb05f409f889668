"""Rescaled radial profile ``zeta = u / r`` in the variable ``s = r^(sigma/2)``.

The substitution spreads the singular behaviour of ``u`` at the origin over
``s`` so that the dual equation becomes a uniformly parabolic Monge-Ampere
type equation for ``zeta`` on ``s in (0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import FlowParams
from ._common import Residual, require_sigma
from .legendre import LegendreField, nonuniform_derivatives, periodic_derivatives

S_MIN_DEFAULT = 0.05


@dataclass
class RescaledProfile:
    theta: np.ndarray
    s: np.ndarray
    zeta: np.ndarray
    time: float
    sigma_p: float
    n: int = 2


def rescaled_zeta(ufield: LegendreField, params: FlowParams) -> RescaledProfile:
    sigma = require_sigma(params)
    r = ufield.r
    s = r ** (sigma / 2.0)
    return RescaledProfile(ufield.theta.copy(), s, ufield.u / r, ufield.time, sigma, ufield.n)


def zeta_source(s, params: FlowParams):
    """``4^p sigma^(-2p) (1 + s^(4/sigma))^(-((n+2)p-1)/2)``."""
    sigma = require_sigma(params)
    s = np.asarray(s, dtype=float)
    return 4.0**params.p * sigma ** (-2.0 * params.p) * (1.0 + s ** (4.0 / sigma)) ** (-params.speed_exponent)


def zeta_matrix(z: RescaledProfile):
    """Entries ``(M_ss, M_stheta, M_thetatheta)`` of the matrix in the rescaled equation."""
    sigma = z.sigma_p
    s = z.s
    zs, zss = nonuniform_derivatives(z.zeta, s, axis=1)
    if len(z.theta) >= 3:
        dth = z.theta[1] - z.theta[0]
        zth, zthth = periodic_derivatives(z.zeta, dth, axis=0)
        zsth, _ = nonuniform_derivatives(zth, s, axis=1)
    else:
        zthth = zsth = np.zeros_like(z.zeta)
    m_ss = zss + (2.0 + sigma) / sigma * zs / s
    m_tt = zthth + z.zeta + 0.5 * sigma * s * zs
    return m_ss, zsth, m_tt


def zeta_det(z: RescaledProfile) -> np.ndarray:
    m_ss, m_st, m_tt = zeta_matrix(z)
    if z.n == 2:
        return m_ss * m_tt - m_st**2
    if len(z.theta) >= 3:
        raise ValueError("angular dependence is only supported for n = 2")
    return m_ss * m_tt ** (z.n - 1)


def zeta_speed(z: RescaledProfile, params: FlowParams) -> np.ndarray:
    """``zeta_t = -Fbar(s) / det(M)^p`` where ``det(M) > 0``; NaN elsewhere."""
    det = zeta_det(z)
    F = np.broadcast_to(zeta_source(z.s, params), det.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -F / det**params.p
    out[~(det > 0)] = np.nan
    return out


def residual_zeta(z: RescaledProfile, zeta_t: np.ndarray, params: FlowParams,
                  s_min: float = S_MIN_DEFAULT) -> Residual:
    """``-zeta_t det(M)^p - Fbar(s)`` on ``s > s_min``, written as ``det^p (speed - zeta_t)``.

    The factored form is algebraically the same and returns exact zero when
    ``zeta_t`` is filled with ``zeta_speed``.
    """
    det = zeta_det(z)
    speed = zeta_speed(z, params)
    band = np.broadcast_to(z.s > s_min, det.shape)
    mask = band & np.isfinite(speed)
    out = np.full(det.shape, np.nan)
    zt = np.asarray(zeta_t, dtype=float)
    with np.errstate(invalid="ignore"):
        out[mask] = det[mask] ** params.p * (speed[mask] - zt[mask])
    return Residual(out, mask, int(np.count_nonzero(~mask)))
