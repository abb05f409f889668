"""Discrete Legendre dual on polar grids in the gradient variable.

``u(x) = max_y (y . x - v(y))`` over the nodes of the source grid.  The flat
side of ``v`` becomes the kink of ``u`` at the origin, whose strength is the
flat volume ``c_t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import GraphGrid, RadialProfile, State
from ..interface import default_eps_int, extract_interface
from ..params import FlowParams
from ._common import Residual, TransformFault

CHUNK = 1 << 22


@dataclass(frozen=True)
class PolarGrid:
    """Angles ``theta`` (uniform, periodic) times radii ``r`` (strictly increasing, > 0)."""

    theta: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size < 3 or np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("r nodes must be positive and strictly increasing (at least 3)")

    @classmethod
    def uniform(cls, n_theta: int, n_r: int, r_max: float, r_min: float | None = None) -> "PolarGrid":
        r_min = r_max / n_r if r_min is None else r_min
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        return cls(theta, np.linspace(r_min, r_max, n_r))

    @classmethod
    def uniform_s(cls, n_theta: int, n_s: int, sigma: float, s_min: float | None = None,
                  s_max: float = 1.0) -> "PolarGrid":
        """Radii ``r = s^(2/sigma)`` for uniformly spaced ``s`` (the rescaled-profile variable)."""
        s_min = s_max / n_s if s_min is None else s_min
        s = np.linspace(s_min, s_max, n_s)
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        return cls(theta, s ** (2.0 / sigma))

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.theta), len(self.r))

    def points(self) -> np.ndarray:
        """Cartesian coordinates, shape ``(n_theta * n_r, 2)``, theta-major."""
        th, rr = np.meshgrid(self.theta, self.r, indexing="ij")
        return np.column_stack([(rr * np.cos(th)).ravel(), (rr * np.sin(th)).ravel()])

    def descriptor(self) -> dict:
        return {"kind": "polar", "theta": self.theta.tolist(), "r": np.asarray(self.r).tolist()}


@dataclass
class LegendreField:
    grid: PolarGrid
    u: np.ndarray
    center_mass: float
    time: float
    n: int = 2

    @property
    def r(self) -> np.ndarray:
        return np.asarray(self.grid.r)

    @property
    def theta(self) -> np.ndarray:
        return np.asarray(self.grid.theta)


def discrete_conjugate(y: np.ndarray, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``max_j (y_j . x_i - values_j)`` for every row ``x_i``.

    The dot product is accumulated coordinate by coordinate, left to right,
    so a plain Python loop in the same order gives identical bits.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    values = np.asarray(values, dtype=float).ravel()
    out = np.empty(len(x))
    rows = max(1, CHUNK // max(1, len(y)))
    for start in range(0, len(x), rows):
        xs = x[start:start + rows]
        acc = y[None, :, 0] * xs[:, None, 0]
        for k in range(1, y.shape[1]):
            acc = acc + y[None, :, k] * xs[:, None, k]
        out[start:start + rows] = np.max(acc - values[None, :], axis=1)
    return out


def _vertex_refine(rho: np.ndarray, V: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Maximum of the parabola through the discrete argmax and its two neighbours."""
    f = rho[None, :] * r[:, None] - V[None, :]
    i = np.clip(np.argmax(f, axis=1), 1, len(rho) - 2)
    rows = np.arange(len(r))
    fm, f0, fp = f[rows, i - 1], f[rows, i], f[rows, i + 1]
    curv = fm - 2 * f0 + fp
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(curv < 0, 0.5 * (fm - fp) / curv, np.inf)
        peak = f0 - 0.25 * (fm - fp) * shift
    return np.where(np.abs(shift) <= 1.0, peak, f.max(axis=1))


def legendre_transform(state: State, grid: PolarGrid, *, n: int = 2, refine: bool = False,
                       eps_int: float | None = None) -> LegendreField:
    """Discrete Legendre transform of ``state`` sampled on ``grid``.

    With the default this is the definition evaluated over the source nodes.
    For radial profiles ``refine`` replaces the discrete maximum by the vertex
    of the parabola through the maximizing node and its neighbours, which
    removes the piecewise-linear ripple a node-wise maximum leaves in second
    differences.
    """
    eps = default_eps_int(state) if eps_int is None else eps_int
    mass = extract_interface(state, eps, n=n).flat_volume
    r = np.asarray(grid.r, dtype=float)
    if isinstance(state, RadialProfile):
        rho, V = state.rho, state.values
        if refine:
            line = _vertex_refine(rho, V, r)
        else:
            line = discrete_conjugate(rho[:, None], V, r[:, None])
        u = np.broadcast_to(line, grid.shape).copy()
    elif isinstance(state, GraphGrid):
        if refine:
            raise ValueError("refine applies to radial profiles only")
        Y1, Y2 = state.mesh()
        y = np.column_stack([Y1.ravel(), Y2.ravel()])
        u = discrete_conjugate(y, state.values.ravel(), grid.points()).reshape(grid.shape)
    else:
        raise TypeError(f"unsupported state {type(state).__name__}")
    return LegendreField(grid, u, mass, state.time, n)


# ---------------------------------------------------------------------------
# polar differences


def nonuniform_derivatives(f: np.ndarray, x: np.ndarray, axis: int = -1):
    """Three-point first and second derivatives on a nonuniform axis (NaN at the ends)."""
    f = np.moveaxis(np.asarray(f, dtype=float), axis, -1)
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    fm, f0, fp = f[..., :-2], f[..., 1:-1], f[..., 2:]
    d1 = np.full(f.shape, np.nan)
    d2 = np.full(f.shape, np.nan)
    d1[..., 1:-1] = (-h1 / (h0 * (h0 + h1)) * fm + (h1 - h0) / (h0 * h1) * f0
                     + h0 / (h1 * (h0 + h1)) * fp)
    d2[..., 1:-1] = 2 * (h1 * fm - (h0 + h1) * f0 + h0 * fp) / (h0 * h1 * (h0 + h1))
    return np.moveaxis(d1, -1, axis), np.moveaxis(d2, -1, axis)


def periodic_derivatives(f: np.ndarray, dtheta: float, axis: int = 0):
    fp = np.roll(f, -1, axis=axis)
    fm = np.roll(f, 1, axis=axis)
    return (fp - fm) / (2 * dtheta), (fp - 2 * f + fm) / dtheta**2


def polar_hessian(u: np.ndarray, theta: np.ndarray, r: np.ndarray):
    """``(u_r, u_rr, tangential, mixed)`` of ``u(theta, r)`` in the orthonormal polar frame."""
    u_r, u_rr = nonuniform_derivatives(u, r, axis=1)
    if len(theta) >= 3:
        dth = theta[1] - theta[0]
        u_th, u_thth = periodic_derivatives(u, dth, axis=0)
        u_rth, _ = nonuniform_derivatives(u_th, r, axis=1)
    else:
        u_th = u_thth = u_rth = np.zeros_like(u)
    tang = u_r / r + u_thth / r**2
    mixed = u_rth / r - u_th / r**2
    return u_r, u_rr, tang, mixed


def dual_det(ufield: LegendreField) -> np.ndarray:
    _, u_rr, tang, mixed = polar_hessian(ufield.u, ufield.theta, ufield.r)
    if ufield.n == 2:
        return u_rr * tang - mixed**2
    if len(ufield.theta) >= 3:
        raise ValueError("angular dependence is only supported for n = 2")
    return u_rr * tang ** (ufield.n - 1)


def dual_speed(ufield: LegendreField, params: FlowParams) -> np.ndarray:
    """``u_t`` predicted by the dual equation away from the origin (NaN where det <= 0)."""
    det = dual_det(ufield)
    rr = np.broadcast_to(ufield.r, det.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -det ** (-params.p) * (1.0 + rr**2) ** (-params.speed_exponent)
    out[~(det > 0)] = np.nan
    return out


def residual_dual(ufield: LegendreField, u_t: np.ndarray, params: FlowParams,
                  r_min: float = 0.2, r_max: float = 0.8) -> Residual:
    """``u_t`` minus the dual-equation speed on ``r_min <= r <= r_max``."""
    if not r_min > 0:
        raise ValueError("r_min must be positive")
    u_t = np.asarray(u_t, dtype=float)
    band = np.broadcast_to((ufield.r >= r_min) & (ufield.r <= r_max), ufield.u.shape)
    if np.any(u_t[band] >= 0):
        idx = tuple(int(i) for i in np.argwhere(band & (u_t >= 0))[0])
        raise TransformFault(f"u_t >= 0 at polar node {idx}: the support function must shrink")
    speed = dual_speed(ufield, params)
    mask = band & np.isfinite(speed)
    out = np.full(ufield.u.shape, np.nan)
    out[mask] = u_t[mask] - speed[mask]
    return Residual(out, mask, int(np.count_nonzero(band & ~mask)))


def tangential_second(ufield: LegendreField) -> np.ndarray:
    """``u_xi_xi`` for unit ``xi`` perpendicular to ``x``."""
    _, _, tang, _ = polar_hessian(ufield.u, ufield.theta, ufield.r)
    return tang


def radial_second(ufield: LegendreField) -> np.ndarray:
    _, u_rr, _, _ = polar_hessian(ufield.u, ufield.theta, ufield.r)
    return u_rr
