"""Checkable surrogates for the non-degeneracy and operator hypotheses."""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.interpolate import RectBivariateSpline
from skimage import measure

from ..grids import RadialProfile, State
from ..interface import radial_crossing
from ..params import FlowParams
from ..transforms.hodograph import (HodographPatch, adjugate_inverse, assemble_Htilde, linearized_coefficients,
                                    pressure_interface_radius)
from ..transforms.pressure import PressureField, pressure_speed, to_pressure
from .holder import ALPHA_DEFAULT, Box, FieldSampler, RadialPressureSampler, holder_norm_c2alpha_mu
from .report import Check, ConditionReport

PINCH_LOW = 0.1
PINCH_HIGH = 10.0
B_HAT_MIN = 0.1


# ---------------------------------------------------------------------------
# geometry helpers


def three_point_curvature(contour: np.ndarray, stride: int = 1, closed: bool = True) -> np.ndarray:
    """Curvature ``4 * area / (a b c)`` of the circle through every point and its ``stride`` neighbours."""
    P = np.asarray(contour, dtype=float)
    if closed and len(P) > 1 and np.allclose(P[0], P[-1]):
        P = P[:-1]
    if len(P) < 2 * stride + 1:
        return np.zeros(0)
    if closed:
        A, B, C = np.roll(P, stride, axis=0), P, np.roll(P, -stride, axis=0)
    else:
        A, B, C = P[:-2 * stride], P[stride:-stride], P[2 * stride:]
    a = np.linalg.norm(B - C, axis=1)
    b = np.linalg.norm(A - C, axis=1)
    c = np.linalg.norm(A - B, axis=1)
    cross = (B[:, 0] - A[:, 0]) * (C[:, 1] - A[:, 1]) - (B[:, 1] - A[:, 1]) * (C[:, 0] - A[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        k = 2.0 * np.abs(cross) / (a * b * c)
    return k[np.isfinite(k)]


def level_set_curvatures(state: State, level: float) -> np.ndarray:
    if isinstance(state, RadialProfile):
        r = radial_crossing(state, level)
        return np.array([]) if not r else np.array([1.0 / r])
    contours = measure.find_contours(state.values, level)
    if not contours:
        return np.array([])
    c = max(contours, key=len) * state.dy + state.lo
    # chords of about 15 degrees keep the estimate above the polyline noise
    stride = max(1, len(c) // 24)
    return three_point_curvature(c, stride=stride)


def default_level_ladder(state: State) -> np.ndarray:
    """Small levels of ``v`` near the flat part.

    Radial profiles use ``(1e-6 .. 1e-3) * height scale``.  On Cartesian grids
    the tiniest levels hug the stored zero set and inherit its staircase, so
    the ladder takes the median height at 2, 4 and 6 cells from the flat set.
    """
    scale = float(np.max(state.values) - np.min(state.values)) or 1.0
    if isinstance(state, RadialProfile):
        return scale * np.array([1e-6, 1e-5, 1e-4, 1e-3])
    cells = ndimage.distance_transform_edt(state.values > 0)
    levels = [float(np.median(state.values[(cells >= k) & (cells < k + 1)]))
              for k in (2, 4, 6) if np.any((cells >= k) & (cells < k + 1))]
    return np.array(levels) if levels else scale * np.array([1e-3])


def _interface_distance(state: State, gfield: PressureField) -> np.ndarray:
    if isinstance(state, RadialProfile):
        return state.rho - pressure_interface_radius(gfield)
    return ndimage.distance_transform_edt(gfield.g > 0) * state.dy


def _pressure_gradient(gfield: PressureField):
    """``|Dg|`` and the Cartesian first/second derivatives (radial: in the normal frame)."""
    g = gfield.g
    d = gfield.spacing
    if isinstance(gfield.grid, RadialProfile):
        g_r = np.gradient(g, d)
        return np.abs(g_r), None
    g1, g2 = np.gradient(g, d, d)
    return np.hypot(g1, g2), (g1, g2)


def _interior_positive(g: np.ndarray) -> np.ndarray:
    ok = g > 0
    if g.ndim == 1:
        inner = np.zeros_like(ok)
        inner[1:-1] = ok[1:-1] & (g[:-2] >= 0) & ok[2:]
        return inner
    inner = np.zeros_like(ok)
    inner[1:-1, 1:-1] = ok[1:-1, 1:-1] & ok[2:, 1:-1] & ok[:-2, 1:-1] & ok[1:-1, 2:] & ok[1:-1, :-2]
    return inner


class GridPressureSampler(FieldSampler):
    """Static pressure on a Cartesian grid in polar chart coordinates around the origin.

    ``x' = r0 * angle`` and ``x_n = |y| - r(angle)`` with ``r(angle)`` read off
    the zero level set; derivatives come from a bicubic spline in the
    radial/angular frame, ``U_t`` from the pressure equation.
    """

    def __init__(self, gfield: PressureField, params: FlowParams, xn_max: float = 0.2, xn_min: float | None = None):
        grid = gfield.grid
        self.n = 2
        a = grid.axis
        self.spline = RectBivariateSpline(a, a, gfield.g, kx=3, ky=3)
        speed = np.nan_to_num(pressure_speed(gfield, params), nan=0.0)
        self.speed = RectBivariateSpline(a, a, speed, kx=1, ky=1)
        level = 0.5 * gfield.spacing
        cs = measure.find_contours(gfield.g, level)
        if not cs:
            raise ValueError("no interface in the pressure field")
        c = max(cs, key=len) * grid.dy + grid.lo
        ang = np.arctan2(c[:, 1], c[:, 0])
        rad = np.hypot(c[:, 0], c[:, 1])
        order = np.argsort(ang)
        self.ang, self.rad = ang[order], rad[order]
        self.r0 = float(np.mean(rad))
        xn_min = min(5.0 * grid.dy, 0.5 * xn_max) if xn_min is None else xn_min
        self.box = Box(0.0, 2 * np.pi * self.r0, xn_min, xn_max, grid.time, grid.time)

    def jet(self, xp, xn, t):
        th = np.asarray(xp, dtype=float)[:, 0] / self.r0
        r_if = np.interp(np.mod(th + np.pi, 2 * np.pi) - np.pi, self.ang, self.rad, period=2 * np.pi)
        rho = r_if + xn
        x1, x2 = rho * np.cos(th), rho * np.sin(th)
        s = self.spline
        g = s.ev(x1, x2)
        gx, gy = s.ev(x1, x2, dx=1), s.ev(x1, x2, dy=1)
        gxx, gyy, gxy = s.ev(x1, x2, dx=2), s.ev(x1, x2, dy=2), s.ev(x1, x2, dx=1, dy=1)
        er = np.stack([np.cos(th), np.sin(th)], axis=1)
        et = np.stack([-np.sin(th), np.cos(th)], axis=1)
        Hs = np.stack([np.stack([gxx, gxy], -1), np.stack([gxy, gyy], -1)], -2)
        grad = np.stack([gx, gy], -1)
        k = len(xn)
        Ui = np.stack([np.einsum("ki,ki->k", grad, et), np.einsum("ki,ki->k", grad, er)], axis=1)
        Uij = np.empty((k, 2, 2))
        Uij[:, 0, 0] = np.einsum("ki,kij,kj->k", et, Hs, et)
        Uij[:, 1, 1] = np.einsum("ki,kij,kj->k", er, Hs, er)
        Uij[:, 0, 1] = Uij[:, 1, 0] = np.einsum("ki,kij,kj->k", et, Hs, er)
        return {"U": g, "Ui": Ui, "Uij": Uij, "Ut": self.speed.ev(x1, x2)}


# ---------------------------------------------------------------------------
# initial conditions


def check_initial_conditions(state: State, params: FlowParams, lambda0: float = 0.5,
                             curvature_bounds: tuple[float, float] = (0.5, 2.0), alpha: float = ALPHA_DEFAULT,
                             eps_ladder=None, pairs: int = 20_000, seed: int = 0,
                             xn_max: float = 0.2) -> ConditionReport:
    """Verdicts for the four non-degeneracy conditions on an initial height field."""
    rep = ConditionReport("initial_conditions")
    ladder = default_level_ladder(state) if eps_ladder is None else np.asarray(eps_ladder, dtype=float)

    # (I1) uniformly convex level sets near the flat part
    curv = np.concatenate([level_set_curvatures(state, float(e)) for e in ladder])
    lo, hi = curvature_bounds
    if curv.size:
        rep.checks["I1_curvature_min"] = Check.within(float(curv.min()), lo, hi)
        rep.checks["I1_curvature_max"] = Check.within(float(curv.max()), lo, hi)
    else:
        rep.checks["I1_curvature_min"] = Check(None, lo, hi, False, "no level set found")
    rep.measured["eps_ladder"] = ladder.tolist()

    gfield = to_pressure(state, params)
    dist = _interface_distance(state, gfield)
    grad, first = _pressure_gradient(gfield)
    d = state.spacing
    band = _interior_positive(gfield.g) & (dist <= 3 * d + 1e-12)
    # (I2) gradient of the pressure bounded above and below on the interface
    if band.any():
        rep.checks["I2_grad_min"] = Check.within(float(grad[band].min()), lambda0, 1.0 / lambda0)
        rep.checks["I2_grad_max"] = Check.within(float(grad[band].max()), lambda0, 1.0 / lambda0)
    else:
        rep.checks["I2_grad_min"] = Check(None, lambda0, 1.0 / lambda0, False, "empty interface band")

    # (I3) finite weighted Hölder norm of the initial pressure
    try:
        if isinstance(state, RadialProfile):
            sampler = RadialPressureSampler([state], params, xn_max=xn_max)
        else:
            sampler = GridPressureSampler(gfield, params, xn_max=xn_max)
        h = holder_norm_c2alpha_mu(sampler, alpha, pairs, seed)
        rep.checks["I3_holder_norm"] = Check.within(h.norm, 0.0, None, f"alpha={alpha}")
        rep.measured["I3_report"] = h.to_dict()
    except ValueError as exc:
        rep.checks["I3_holder_norm"] = Check(None, 0.0, None, False, str(exc))

    # (I4) tangential derivative of the gradient along the level set
    if isinstance(state, RadialProfile):
        # D^2 g maps the radial gradient to a radial vector, so its tangential part vanishes
        val = 0.0 if band.any() else float("nan")
    else:
        g1, g2 = first
        g11 = np.gradient(g1, d, axis=0)
        g12 = np.gradient(g1, d, axis=1)
        g22 = np.gradient(g2, d, axis=1)
        nrm = np.hypot(g1, g2)
        with np.errstate(divide="ignore", invalid="ignore"):
            t1, t2 = -g2 / nrm, g1 / nrm
            q = np.abs(t1 * (g11 * g1 + g12 * g2) + t2 * (g12 * g1 + g22 * g2))
        # second differences need two positive cells on every side
        deep = (dist >= 3 * d) & (dist <= 6 * d) & (gfield.g > 0)
        val = float(np.nanmax(q[deep])) if deep.any() else float("nan")
    rep.checks["I4_tangential"] = Check.within(val, 0.0, None)
    return rep


# ---------------------------------------------------------------------------
# transversality along a trajectory


def check_transversality(states: list[State], params: FlowParams, collar: float = 0.2,
                         low: float = PINCH_LOW, high: float = PINCH_HIGH,
                         delta: float | None = None) -> ConditionReport:
    """Ranges of ``g_t``, ``|Dg|`` and ``g / dist`` on ``{delta < g < collar}``.

    ``g_t`` is a centered difference between consecutive snapshots, or the
    pressure-equation speed when a single snapshot is given.
    """
    if not states:
        raise ValueError("need at least one snapshot")
    rep = ConditionReport("transversality")
    fields = [to_pressure(s, params) for s in states]
    d = states[0].spacing
    delta = 5.0 * d if delta is None else delta
    acc = {k: [] for k in ("g_t", "grad", "ratio")}
    if len(states) == 1:
        pairs = [(fields[0], pressure_speed(fields[0], params))]
    else:
        pairs = []
        for a, b in zip(fields[:-1], fields[1:]):
            mid = PressureField(a.grid.with_values(0.5 * (a.g + b.g), 0.5 * (a.time + b.time)), a.sigma_p)
            pairs.append((mid, (b.g - a.g) / (b.time - a.time)))
    for gf, gt in pairs:
        sel = (gf.g > delta) & (gf.g < collar) & _interior_positive(gf.g)
        if not sel.any():
            continue
        grad, _ = _pressure_gradient(gf)
        dist = _interface_distance(gf.grid, gf)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = gf.g / dist
        acc["g_t"].append(np.asarray(gt)[sel])
        acc["grad"].append(grad[sel])
        acc["ratio"].append(ratio[sel])
    if not acc["g_t"]:
        rep.checks["collar"] = Check(None, None, None, False, "empty collar")
        return rep
    for key, arrs in acc.items():
        v = np.concatenate(arrs)
        rep.checks[f"{key}_min"] = Check.within(float(np.min(v)), low, high)
        rep.checks[f"{key}_max"] = Check.within(float(np.max(v)), low, high)
    rep.measured["collar"] = collar
    rep.measured["delta"] = delta
    return rep


# ---------------------------------------------------------------------------
# matrix pinch and degenerate-operator hypotheses


def check_matrix_pinch(field: np.ndarray, low: float = PINCH_LOW, high: float = PINCH_HIGH,
                       name: str = "pinch") -> ConditionReport:
    """Eigenvalue range of a field of symmetric matrices (non-finite entries skipped)."""
    M = np.asarray(field, dtype=float)
    k = M.shape[-1]
    flat = M.reshape(-1, k, k)
    ok = np.all(np.isfinite(flat), axis=(1, 2))
    rep = ConditionReport(name)
    rep.measured["skipped"] = int(np.count_nonzero(~ok))
    if not ok.any():
        rep.checks["eigenvalues"] = Check(None, low, high, False, "no finite matrices")
        return rep
    ev = np.linalg.eigvalsh(0.5 * (flat[ok] + np.swapaxes(flat[ok], 1, 2)))
    rep.checks["eig_min"] = Check.within(float(ev.min()), low, high)
    rep.checks["eig_max"] = Check.within(float(ev.max()), low, high)
    return rep


def hodograph_operator(patch: HodographPatch, params: FlowParams):
    """Coefficients ``(a, b, x_n)`` of the linearized hodograph operator in the degenerate normal form.

    With ``x_n = z``: ``a = p * H~^{-1}`` and ``b = (tangential drift, b_hat)``.
    """
    H = assemble_Htilde(patch, params)
    inv, _ = adjugate_inverse(H)
    lc = linearized_coefficients(patch, params)
    b = np.stack([lc.b_tangential, lc.b_hat], axis=-1)
    z = np.broadcast_to(patch.z[None, :], patch.h.shape)
    return params.p * inv, b, z, lc


def check_degenerate_operator_hypotheses(a: np.ndarray, b: np.ndarray, x_n: np.ndarray, lam: float = 0.1,
                                         nu: float = 0.5, b_hat_threshold: float | None = B_HAT_MIN,
                                         boundary_tol: float = 0.0) -> ConditionReport:
    """Ellipticity, coefficient bounds, ``2 b_n / a_nn >= nu`` and ``b_n >= lam`` on ``{x_n = 0}``.

    ``a`` has shape ``(..., n, n)``, ``b`` ``(..., n)`` and ``x_n`` ``(...)``.
    ``b_hat_threshold`` additionally bounds ``b_n`` from below everywhere.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x_n = np.asarray(x_n, dtype=float)
    n = a.shape[-1]
    rep = ConditionReport("degenerate_operator")
    ok = np.all(np.isfinite(a), axis=(-2, -1)) & np.all(np.isfinite(b), axis=-1)
    A, B, X = a[ok], b[ok], x_n[ok]
    rep.measured["skipped"] = int(np.count_nonzero(~ok))
    if A.size == 0:
        rep.checks["coefficients"] = Check(None, note="no finite coefficients")
        return rep
    ev = np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2)))
    rep.checks["ellipticity"] = Check.within(float(ev.min()), lam, None)
    bound = max(float(np.abs(A).max()), float(np.abs(B).max()))
    rep.checks["coefficient_bound"] = Check.within(bound, None, 1.0 / lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = 2.0 * B[:, n - 1] / A[:, n - 1, n - 1]
    rep.checks["drift_ratio"] = Check.within(float(np.min(ratio)), nu, None)
    edge = X <= boundary_tol
    if edge.any():
        rep.checks["boundary_drift"] = Check.within(float(B[edge, n - 1].min()), lam, None)
    else:
        rep.checks["boundary_drift"] = Check(None, lam, None, None, "no nodes on x_n = 0")
    if b_hat_threshold is not None:
        rep.checks["b_hat"] = Check.within(float(B[:, n - 1].min()), b_hat_threshold, None)
    return rep

