"""Hodograph charts near the interface.

In a frame whose ``e_n`` is the outer normal of the flat part at an
interface point, the pressure is increasing along ``e_n``.  Solving
``g(y', y_n) = z`` for ``y_n = -h(y', z)`` flattens the free boundary onto
``{z = 0}``; ``h`` satisfies a parabolic equation whose matrix ``H~`` and
linearization are assembled here.  Only planar charts (n = 2) are built.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.interpolate import PchipInterpolator, RectBivariateSpline

from ..grids import GraphGrid, RadialProfile
from ..params import FlowParams
from ._common import Residual, TransformFault, require_sigma
from .pressure import PressureField

log = logging.getLogger(__name__)

ROOT_TOL = 1e-12
ANCHOR_TOL = 4.0  # grid spacings between the anchor and the zero level
LAMBDA_DEFAULT = 0.1
COND_MAX = 1e12


# ---------------------------------------------------------------------------
# pressure as a function of the chart coordinates


def extend_radial_pressure(g: np.ndarray, dr: float, delta: float) -> np.ndarray:
    """Replace ``g < delta`` inside the collar by the line through the first two nodes above it.

    The extension is negative on the flat part, so every column crosses each
    level ``z >= 0`` exactly once and the ``z = 0`` root is the extrapolated
    interface rather than the last stored zero.
    """
    g = np.asarray(g, dtype=float)
    above = np.nonzero(g >= delta)[0]
    if above.size < 2 or above[0] == 0:
        return g.copy()
    i = int(above[0])
    slope = (g[i + 1] - g[i]) / dr
    out = g.copy()
    out[:i] = g[i] + slope * (np.arange(i) - i) * dr
    return out


def extend_cartesian_pressure(g: np.ndarray, dy: float, delta: float) -> np.ndarray:
    """Planar analogue of :func:`extend_radial_pressure`.

    Every node with ``g < delta`` takes the first-order Taylor value from the
    nearest node with ``g >= delta``, so the flat part carries a negative,
    nearly linear continuation of the pressure.
    """
    g = np.asarray(g, dtype=float)
    low = g < delta
    if not low.any() or low.all():
        return g.copy()
    g1, g2 = np.gradient(g, dy, dy)
    _, (i1, i2) = ndimage.distance_transform_edt(low, return_indices=True)
    out = g.copy()
    idx = np.nonzero(low)
    src = (i1[idx], i2[idx])
    out[idx] = g[src] + g1[src] * (idx[0] - src[0]) * dy + g2[src] * (idx[1] - src[1]) * dy
    return out


class PressureEvaluator:
    """Continuous pressure ``g(x1, x2)`` built from a gridded field (NaN off the domain)."""

    def __init__(self, gfield: PressureField | None = None, *, func=None, extend_delta: float | None = None):
        self.func = func
        self.grid = None if gfield is None else gfield.grid
        if func is not None:
            return
        grid = gfield.grid
        if isinstance(grid, RadialProfile):
            delta = 2.0 * grid.dr if extend_delta is None else extend_delta
            g = extend_radial_pressure(gfield.g, grid.dr, delta) if delta > 0 else gfield.g
            self._radial = PchipInterpolator(grid.rho, g, extrapolate=False)
            self._bound = grid.rho_max
        elif isinstance(grid, GraphGrid):
            delta = 3.0 * grid.dy if extend_delta is None else extend_delta
            g = extend_cartesian_pressure(gfield.g, grid.dy, delta) if delta > 0 else gfield.g
            self._spline = RectBivariateSpline(grid.axis, grid.axis, g, kx=3, ky=3)
            self._box = (grid.lo, grid.hi)
        else:
            raise TypeError(f"unsupported grid {type(grid).__name__}")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(x1, x2), dtype=float)
        if isinstance(self.grid, RadialProfile):
            return self._radial(np.hypot(x1, x2))
        lo, hi = self._box
        out = self._spline.ev(x1, x2)
        outside = (x1 < lo) | (x1 > hi) | (x2 < lo) | (x2 > hi)
        return np.where(outside, np.nan, out)


# ---------------------------------------------------------------------------
# patch


def _second_difference(f: np.ndarray, d: float, axis: int) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / d**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / d**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / d**2
    return np.moveaxis(out, 0, axis)


@dataclass
class HodographPatch:
    """``h(y', z)`` on ``[-eta, eta] x [0, eta]``; axis 0 is ``y'``, axis 1 is ``z``."""

    y_prime: np.ndarray
    z: np.ndarray
    h: np.ndarray
    anchor: np.ndarray
    normal: np.ndarray
    eta: float
    spacing: float
    time: float
    shrinks: int = 0
    tables: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.tables:
            self.tables = hodograph_differences(self.h, self.spacing)

    @property
    def tangent(self) -> np.ndarray:
        return np.array([-self.normal[1], self.normal[0]])

    def chart_points(self, h: np.ndarray | None = None):
        """Cartesian coordinates of the surface points ``(y', -h)`` for every node."""
        h = self.h if h is None else h
        yp = self.y_prime[:, None]
        yn = -h
        x = self.anchor[None, None, :] + yp[..., None] * self.tangent + yn[..., None] * self.normal
        return x[..., 0], x[..., 1]


def hodograph_differences(h: np.ndarray, d: float) -> dict:
    """First and second difference tables: central inside, second-order one-sided on edges."""
    h1, hz = np.gradient(h, d, d, edge_order=2)
    return {
        "h1": h1,
        "hz": hz,
        "h11": _second_difference(h, d, 0),
        "h1z": np.gradient(h1, d, axis=1, edge_order=2),
        "hzz": _second_difference(h, d, 1),
    }


def _bracket(evaluate, yp, z, width, doublings: int = 8):
    """Per-node bracket ``g(lo) <= z < g(hi)``, widened geometrically; ``ok`` marks success."""
    lo = np.full(z.shape, -width)
    hi = np.full(z.shape, width)
    for _ in range(doublings):
        low_bad = ~(evaluate(yp, lo) <= z)
        high_bad = ~(evaluate(yp, hi) > z)
        if not (low_bad.any() or high_bad.any()):
            break
        lo = np.where(low_bad, 2 * lo, lo)
        hi = np.where(high_bad, 2 * hi, hi)
    ok = (evaluate(yp, lo) <= z) & (evaluate(yp, hi) > z)
    return lo, hi, ok


def _bisect_columns(evaluate, yp, z, lo, hi, tol):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(200):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        below = evaluate(yp, mid) <= z
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def hodograph_solve(gfield: PressureField | None, anchor, eta: float, *, normal=None, spacing: float | None = None,
                    lam: float = LAMBDA_DEFAULT, evaluator: PressureEvaluator | None = None,
                    tol: float = ROOT_TOL, max_shrink: int = 12, time: float | None = None) -> HodographPatch:
    """Solve ``g(y', y_n) = z`` column by column on the chart anchored at ``anchor``.

    ``anchor`` is a point of the interface (a radius is accepted for radial
    fields); ``normal`` defaults to the radial direction.  Columns whose root
    is not bracketed shrink the patch by a factor 3/4 until every node is
    solvable; the number of shrinks is recorded on the patch.
    """
    if gfield is None and evaluator is None:
        raise ValueError("need a pressure field or an evaluator")
    ev = evaluator if evaluator is not None else PressureEvaluator(gfield)
    a = np.atleast_1d(np.asarray(anchor, dtype=float))
    if a.size == 1:
        a = np.array([a[0], 0.0])
    if normal is None:
        norm = np.hypot(*a)
        if norm == 0:
            raise ValueError("anchor at the origin needs an explicit normal")
        nu = a / norm
    else:
        nu = np.asarray(normal, dtype=float)
        nu = nu / np.hypot(*nu)
    tau = np.array([-nu[1], nu[0]])
    d = gfield.spacing if spacing is None else spacing
    t = (gfield.time if gfield is not None else 0.0) if time is None else time

    def g_chart(yp, yn):
        return ev(a[0] + yp * tau[0] + yn * nu[0], a[1] + yp * tau[1] + yn * nu[1])

    slope = float((g_chart(0.0, d) - g_chart(0.0, -d)) / (2 * d))
    if not slope >= lam:
        raise TransformFault(f"transversality fails at the anchor: g_n = {slope:.4g} < {lam:.4g}")
    offset = float(g_chart(0.0, 0.0)) / slope
    if not abs(offset) <= ANCHOR_TOL * d:
        raise TransformFault(f"anchor lies {offset:.4g} off the interface along the normal")

    shrinks = 0
    while True:
        m = max(2, int(round(eta / d)))
        eta = m * d
        yp = np.arange(-m, m + 1) * d
        zz = np.arange(0, m + 1) * d
        Yp, Z = np.meshgrid(yp, zz, indexing="ij")
        lo, hi, ok = _bracket(g_chart, Yp, Z, 2.0 * eta + 4 * d)
        if ok.all():
            break
        if shrinks >= max_shrink or m <= 4:
            raise TransformFault(f"hodograph roots not bracketed after {shrinks} shrinks (eta={eta:.4g})")
        shrinks += 1
        eta *= 0.75
        log.info("hodograph patch shrunk to eta=%.4g (%d unbracketed columns)", eta, int((~ok).sum()))
    yn = _bisect_columns(g_chart, Yp, Z, lo, hi, tol)
    patch = HodographPatch(yp, zz, -yn, a, nu, eta, d, t, shrinks)
    if not np.all(patch.tables["hz"] < 0):
        bad = tuple(int(i) for i in np.argwhere(~(patch.tables["hz"] < 0))[0])
        raise TransformFault(f"h_z >= 0 at patch node {bad}: pressure not increasing along the normal")
    return patch


def hodograph_gradient(patch: HodographPatch):
    """Pressure gradient recovered from ``h`` in the chart frame: ``(g_tangent, g_normal)``."""
    T = patch.tables
    return -T["h1"] / T["hz"], -1.0 / T["hz"]


# ---------------------------------------------------------------------------
# H~, residual, linearization


def _denominator(patch: HodographPatch, params: FlowParams) -> np.ndarray:
    sigma = require_sigma(params)
    T = patch.tables
    z = patch.z[None, :]
    return T["hz"] ** 2 + z ** (2.0 / sigma) * (1.0 + T["h1"] ** 2)


def assemble_Htilde(patch: HodographPatch, params: FlowParams) -> np.ndarray:
    """Symmetric ``2 x 2`` matrices ``H~`` at every node, shape ``(ny, nz, 2, 2)``."""
    sigma = require_sigma(params)
    T = patch.tables
    rz = np.sqrt(patch.z)[None, :]
    z = patch.z[None, :]
    H = np.empty(patch.h.shape + (2, 2))
    H[..., 0, 0] = T["h11"]
    H[..., 0, 1] = H[..., 1, 0] = rz * T["h1z"]
    H[..., 1, 1] = z * T["hzz"] - T["hz"] / sigma
    return H


def hodograph_speed(patch: HodographPatch, params: FlowParams) -> np.ndarray:
    H = assemble_Htilde(patch, params)
    det = np.maximum(H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] ** 2, 0.0)
    return det**params.p / _denominator(patch, params) ** params.speed_exponent


def pressure_det_from_hodograph(patch: HodographPatch, params: FlowParams) -> np.ndarray:
    """``g det(D^2 g + Dg (x) Dg / (sigma g))`` expressed through ``h``."""
    H = assemble_Htilde(patch, params)
    det = H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] ** 2
    return det / np.abs(patch.tables["hz"]) ** (params.n + 2)


def residual_hodograph(patch: HodographPatch, h_t: np.ndarray, params: FlowParams,
                       delta_res: float | None = None) -> Residual:
    """``h_t`` minus the hodograph speed on interior nodes with ``z > delta_res``."""
    if params.n != 2:
        raise ValueError("hodograph charts are planar (n = 2)")
    delta = 5.0 * patch.spacing if delta_res is None else delta_res
    speed = hodograph_speed(patch, params)
    mask = np.zeros(patch.h.shape, dtype=bool)
    mask[1:-1, 1:-1] = True
    mask &= (patch.z > delta)[None, :] & np.isfinite(speed)
    out = np.full(patch.h.shape, np.nan)
    out[mask] = np.asarray(h_t, dtype=float)[mask] - speed[mask]
    return Residual(out, mask, int(np.count_nonzero(~mask)))


@dataclass
class LinearizedCoefficients:
    """Coefficients of the linearized hodograph operator at every patch node."""

    a_tt: np.ndarray
    a_tz: np.ndarray
    a_zz: np.ndarray
    b_hat: np.ndarray
    b_tangential: np.ndarray
    time_coefficient: np.ndarray | None
    condition: np.ndarray


def adjugate_inverse(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse and determinant of stacked 2x2 or 3x3 matrices via the adjugate."""
    k = M.shape[-1]
    if k == 2:
        det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
        adj = np.empty_like(M)
        adj[..., 0, 0] = M[..., 1, 1]
        adj[..., 1, 1] = M[..., 0, 0]
        adj[..., 0, 1] = -M[..., 0, 1]
        adj[..., 1, 0] = -M[..., 1, 0]
    elif k == 3:
        adj = np.empty_like(M)
        for i in range(3):
            for j in range(3):
                rows = [r for r in range(3) if r != j]
                cols = [c for c in range(3) if c != i]
                minor = (M[..., rows[0], cols[0]] * M[..., rows[1], cols[1]]
                         - M[..., rows[0], cols[1]] * M[..., rows[1], cols[0]])
                adj[..., i, j] = (-1) ** (i + j) * minor
        det = np.einsum("...j,...j->...", M[..., 0, :], adj[..., :, 0])
    else:
        raise ValueError("adjugate inverse is implemented for 2x2 and 3x3 only")
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = adj / det[..., None, None]
    return inv, det


def linearized_coefficients(patch: HodographPatch, params: FlowParams,
                            h_t: np.ndarray | None = None) -> LinearizedCoefficients:
    sigma = require_sigma(params)
    H = assemble_Htilde(patch, params)
    inv, det = adjugate_inverse(H)
    cond = np.linalg.norm(H, axis=(-2, -1)) * np.linalg.norm(inv, axis=(-2, -1))
    bad = ~np.isfinite(cond) | (cond > COND_MAX)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise TransformFault(f"H~ singular at patch node {idx} (condition number {cond[idx]:.3g})")
    T = patch.tables
    p = params.p
    z = patch.z[None, :]
    D = _denominator(patch, params)
    kk = (params.n + 2) * p - 1.0
    b_hat = -(kk * T["hz"] / D + p / sigma * inv[..., 1, 1])
    b_tan = -kk * z ** (2.0 / sigma) / D * T["h1"]
    t_coef = None if h_t is None else -1.0 / np.asarray(h_t, dtype=float)
    return LinearizedCoefficients(
        a_tt=p * inv[..., 0, 0],
        a_tz=2 * p * inv[..., 0, 1] * np.sqrt(z),
        a_zz=p * z * inv[..., 1, 1],
        b_hat=b_hat,
        b_tangential=b_tan,
        time_coefficient=t_coef,
        condition=cond,
    )


def boundary_drift(patch: HodographPatch, params: FlowParams) -> np.ndarray:
    """The limit ``-((n+1)p - 1)/h_z`` of the drift on ``{z = 0}``, evaluated at every node."""
    return -((params.n + 1) * params.p - 1.0) / patch.tables["hz"]


def pressure_interface_radius(gfield: PressureField, delta: float | None = None) -> float:
    """Zero of the extended radial pressure: the interface located by linear extrapolation."""
    grid = gfield.grid
    if not isinstance(grid, RadialProfile):
        raise TypeError("interface radius from the pressure needs a radial field")
    delta = 2.0 * grid.dr if delta is None else delta
    g = extend_radial_pressure(gfield.g, grid.dr, delta)
    i = int(np.nonzero(g > 0)[0][0])
    if i == 0:
        return 0.0
    return float(grid.rho[i - 1] + (-g[i - 1]) / (g[i] - g[i - 1]) * grid.dr)


def patch_pair(ga: PressureField, gb: PressureField, anchor, eta: float, **kw):
    """Midpoint patch and ``h_t`` from two snapshots on one fixed chart."""
    pa = hodograph_solve(ga, anchor, eta, **kw)
    pb = hodograph_solve(gb, anchor, pa.eta, **kw)
    if pa.h.shape != pb.h.shape:
        raise TransformFault("snapshot patches disagree in size")
    tm = 0.5 * (ga.time + gb.time)
    mid = HodographPatch(pa.y_prime, pa.z, 0.5 * (pa.h + pb.h), pa.anchor, pa.normal, pa.eta, pa.spacing, tm,
                         max(pa.shrinks, pb.shrinks))
    return mid, (pb.h - pa.h) / (gb.time - ga.time)
