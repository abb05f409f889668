"""Explicit finite-difference evolution of the height function.

The graph of ``v`` moves by the p-th power of its Gauss curvature,

    v_t = (det D^2 v)^p / (1 + |Dv|^2)^(((n+2)p - 1)/2),

discretised with central differences and forward Euler.  The determinant is
clamped at zero before the power so that ``v_t >= 0`` holds for every
discrete state, which keeps accepted trajectories monotone in time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .grids import GraphGrid, RadialProfile, State
from .params import FlowParams

logger = logging.getLogger(__name__)

CFL_DEFAULT = 0.4
EPS_FLAT = 1e-12


class StepFault(RuntimeError):
    """A step produced non-finite values or violated its stability bound."""

    def __init__(self, message: str, *, suggested_dt: float | None = None, location=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt
        self.location = location


# ---------------------------------------------------------------------------
# pointwise kernels


def graph_speed(det, grad_sq, params: FlowParams):
    """Vertical speed of the graph from ``det D^2 v`` and ``|Dv|^2``."""
    det = np.maximum(det, 0.0)
    return det**params.p / (1.0 + grad_sq) ** params.speed_exponent


def radial_speed(v_r, v_rr, rho, params: FlowParams):
    """Speed of a rotationally symmetric graph from analytic radial derivatives.

    At ``rho == 0`` the tangential factor ``v_r / rho`` is replaced by ``v_rr``.
    """
    v_r = np.asarray(v_r, dtype=float)
    v_rr = np.asarray(v_rr, dtype=float)
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.where(rho > 0, v_r / np.where(rho > 0, rho, 1.0), v_rr)
    det = np.maximum(v_rr, 0.0) * np.maximum(tangential, 0.0) ** (params.n - 1)
    return graph_speed(det, v_r**2, params)


# ---------------------------------------------------------------------------
# discrete derivatives


def _last_flat_mask(v: np.ndarray, axis: int, forward: bool) -> np.ndarray:
    """Exactly-flat nodes whose far neighbour is flat and near neighbour positive."""
    mask = np.zeros(v.shape, dtype=bool)
    inner = [slice(None)] * v.ndim
    prev = [slice(None)] * v.ndim
    nxt = [slice(None)] * v.ndim
    inner[axis] = slice(1, -2) if forward else slice(2, -1)
    prev[axis] = slice(0, -3) if forward else slice(3, None)
    nxt[axis] = slice(2, -1) if forward else slice(1, -2)
    m = (v[tuple(inner)] == 0.0) & (v[tuple(prev)] == 0.0) & (v[tuple(nxt)] > 0.0)
    mask[tuple(inner)] = m
    return mask


def radial_derivatives(V: np.ndarray, dr: float):
    """Second difference, tangential factor ``V_r / rho`` and slope on the radial grid.

    Returns arrays for the interior nodes ``0..N-1`` (the outer node is handled
    by the caller).  The origin uses the even reflection ``V_{-1} = V_1``.
    """
    N = V.size - 1
    rho = np.arange(N) * dr
    vrr = np.empty(N)
    vrr[1:] = (V[2:] - 2.0 * V[1:-1] + V[:-2]) / dr**2
    vrr[0] = 2.0 * (V[1] - V[0]) / dr**2
    slope = np.empty(N)
    slope[1:] = (V[2:] - V[:-2]) / (2.0 * dr)
    slope[0] = 0.0
    # one-sided second difference at the last flat node before the collar
    last_flat = np.zeros(N, dtype=bool)
    last_flat[1 : N - 1] = (V[1 : N - 1] == 0.0) & (V[0 : N - 2] == 0.0) & (V[2:N] > 0.0)
    idx = np.nonzero(last_flat)[0]
    if idx.size:
        vrr[idx] = (V[idx + 2] - 2.0 * V[idx + 1] + V[idx]) / dr**2
    tangential = np.empty(N)
    tangential[1:] = slope[1:] / rho[1:]
    tangential[0] = vrr[0]
    return vrr, tangential, slope


def rhs_radial(state: RadialProfile, params: FlowParams) -> np.ndarray:
    """Discrete right-hand side of the radially reduced graph equation."""
    V = state.values
    vrr, tang, slope = radial_derivatives(V, state.dr)
    det = np.maximum(vrr, 0.0) * np.maximum(tang, 0.0) ** (params.n - 1)
    out = np.empty_like(V)
    out[:-1] = graph_speed(det, slope**2, params)
    out[-1] = out[-2]
    _check_finite(out, "rhs_radial", state)
    return out


def graph_derivatives(v: np.ndarray, dy: float):
    """Central first and second differences on the interior of a Cartesian grid."""
    c = v[1:-1, 1:-1]
    v1 = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * dy)
    v2 = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * dy)
    v11 = (v[2:, 1:-1] - 2.0 * c + v[:-2, 1:-1]) / dy**2
    v22 = (v[1:-1, 2:] - 2.0 * c + v[1:-1, :-2]) / dy**2
    v12 = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4.0 * dy**2)
    # one-sided second differences at flat nodes bordering the collar
    for axis, arr in ((0, v11), (1, v22)):
        for forward in (True, False):
            mask = _last_flat_mask(v, axis, forward)[1:-1, 1:-1]
            if not mask.any():
                continue
            ii, jj = np.nonzero(mask)
            gi, gj = ii + 1, jj + 1
            s = 1 if forward else -1
            if axis == 0:
                arr[ii, jj] = (v[gi + 2 * s, gj] - 2.0 * v[gi + s, gj] + v[gi, gj]) / dy**2
            else:
                arr[ii, jj] = (v[gi, gj + 2 * s] - 2.0 * v[gi, gj + s] + v[gi, gj]) / dy**2
    return v1, v2, v11, v22, v12


def _fill_boundary(inner: np.ndarray) -> np.ndarray:
    return np.pad(inner, 1, mode="edge")


def rhs_graph(state: GraphGrid, params: FlowParams) -> np.ndarray:
    """Discrete right-hand side of the graph equation on a Cartesian grid."""
    if params.n != 2:
        raise ValueError("Cartesian grids require n = 2")
    v1, v2, v11, v22, v12 = graph_derivatives(state.values, state.dy)
    det = v11 * v22 - v12**2
    out = _fill_boundary(graph_speed(det, v1**2 + v2**2, params))
    _check_finite(out, "rhs_graph", state)
    return out


def rhs(state: State, params: FlowParams) -> np.ndarray:
    if isinstance(state, RadialProfile):
        return rhs_radial(state, params)
    return rhs_graph(state, params)


def _check_finite(arr: np.ndarray, where: str, state) -> None:
    bad = ~np.isfinite(arr)
    if bad.any():
        loc = tuple(int(i) for i in np.argwhere(bad)[0])
        raise StepFault(f"{where}: non-finite value at node {loc} (t={state.time:.6g})", location=loc)


# ---------------------------------------------------------------------------
# stability bound


def max_parabolic_coefficient(state: State, params: FlowParams) -> float:
    """Largest diffusion coefficient of the linearised operator on non-flat nodes."""
    p = params.p
    if isinstance(state, RadialProfile):
        n = params.n
        vrr, tang, slope = radial_derivatives(state.values, state.dr)
        A = np.maximum(vrr, 0.0)
        B = np.maximum(tang, 0.0)
        det = A * B ** (n - 1)
        w = (1.0 + slope**2) ** params.speed_exponent
        active = det > 0
        if not active.any():
            return 0.0
        dp = p * det[active] ** (p - 1.0)
        coef_a = dp * B[active] ** (n - 1)
        coef_b = dp * (n - 1) * A[active] * B[active] ** (n - 2) if n >= 2 else 0.0
        return float(np.max((coef_a + coef_b) / w[active]))
    v1, v2, v11, v22, v12 = graph_derivatives(state.values, state.dy)
    det = v11 * v22 - v12**2
    active = det > 0
    if not active.any():
        return 0.0
    # cofactor matrix of D^2 v is [[v22, -v12], [-v12, v11]]
    cof = np.sqrt(v11**2 + v22**2 + 2.0 * v12**2)
    w = (1.0 + v1**2 + v2**2) ** params.speed_exponent
    coef = p * det[active] ** (p - 1.0) * cof[active] / w[active]
    return float(np.max(coef))


def stable_dt(state: State, params: FlowParams, cfl: float = CFL_DEFAULT) -> float:
    coef = max_parabolic_coefficient(state, params)
    if coef <= 0:
        return math.inf
    return cfl * state.spacing**2 / coef


class SphereCapBoundary:
    """Dirichlet data from the closed-form shrinking sphere (lower cap, fixed center)."""

    def __init__(self, params: FlowParams, R0: float, center: float | None = None):
        self.params = params
        self.R0 = float(R0)
        self.center = float(R0 if center is None else center)

    def __call__(self, t: float, rho):
        from .interface import sphere_cap_height

        return sphere_cap_height(self.params, self.R0, t, rho, self.center)


def _boundary_coords(state: State):
    if isinstance(state, RadialProfile):
        return state.rho_max
    y1, y2 = state.mesh()
    edge = np.zeros(state.values.shape, dtype=bool)
    edge[[0, -1], :] = True
    edge[:, [0, -1]] = True
    return edge, np.hypot(y1[edge], y2[edge]), (y1[edge], y2[edge])


def apply_boundary(state: State, boundary) -> State:
    """Overwrite boundary nodes with Dirichlet data ``boundary(t, rho)``."""
    if boundary is None or boundary == "copy":
        return state
    v = state.values
    if isinstance(state, RadialProfile):
        v[-1] = boundary(state.time, state.rho_max)
    else:
        edge, r, _ = _boundary_coords(state)
        v[edge] = boundary(state.time, r)
    return state


def step_explicit(state: State, params: FlowParams, dt: float, *, cfl: float = CFL_DEFAULT,
                  check_cfl: bool = True, boundary=None) -> State:
    """One forward-Euler step; rejects ``dt`` above the CFL bound.

    ``boundary`` is ``None``/``"copy"`` (outer nodes take the neighbouring
    interior rate) or a callable ``boundary(t, rho)`` giving Dirichlet values.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return state.with_values(state.values.copy())
    if check_cfl:
        limit = stable_dt(state, params, cfl)
        if dt > limit * (1 + 1e-12):
            raise StepFault(f"dt={dt:.3e} exceeds CFL bound {limit:.3e}", suggested_dt=limit)
    new = state.values + dt * rhs(state, params)
    return apply_boundary(state.with_values(new, time=state.time + dt), boundary)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    interfaces: list = field(default_factory=list)
    steps: int = 0
    stopped: str = "t_end"
    last_good: State | None = None
    convexity_violations: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def at(self, t: float, tol: float = 1e-12) -> State:
        for s in self.states:
            if abs(s.time - t) <= tol * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t={t}")


def discrete_convexity_violation(state: GraphGrid) -> float:
    """Most negative second difference along axes and diagonals (0 if convex)."""
    v = state.values
    c = v[1:-1, 1:-1]
    worst = 0.0
    for a, b in (
        (v[2:, 1:-1], v[:-2, 1:-1]),
        (v[1:-1, 2:], v[1:-1, :-2]),
        (v[2:, 2:], v[:-2, :-2]),
        (v[2:, :-2], v[:-2, 2:]),
    ):
        worst = min(worst, float(np.min(a + b - 2.0 * c)))
    return -worst


def _kernel_boundary(boundary, state: RadialProfile):
    from . import _radial_kernel as rk

    if boundary is None or boundary == "copy":
        return rk.BOUNDARY_COPY, np.zeros(4)
    if isinstance(boundary, SphereCapBoundary):
        k = boundary.params.n * boundary.params.p + 1.0
        return rk.BOUNDARY_SPHERE, np.array([boundary.R0, boundary.center, state.rho_max, k])
    return None


def _advance(state: State, params: FlowParams, target: float, cfl: float, dt_refresh: int,
             boundary, use_kernel: bool, traj: "Trajectory", convexity_tol: float) -> State:
    if use_kernel and isinstance(state, RadialProfile):
        kb = _kernel_boundary(boundary, state)
        if kb is not None:
            from ._radial_kernel import advance_radial

            V = state.values.copy()
            t, steps, status = advance_radial(
                V, state.dr, params.n, params.p, params.speed_exponent,
                state.time, target, cfl, kb[0], kb[1], 10**9,
            )
            traj.steps += steps
            if status != 0:
                # replay the failing step through the reference path for a located fault
                rhs_radial(state.with_values(V, time=t), params)
                raise StepFault(f"radial kernel stopped with status {status} at t={t:.6g}")
            return state.with_values(V, time=target)
    dt_cached = None
    k = 0
    while state.time < target - 1e-15 * max(1.0, target):
        if dt_cached is None or k % dt_refresh == 0:
            dt_cached = stable_dt(state, params, cfl)
        dt = min(dt_cached, target - state.time)
        state = step_explicit(state, params, dt, cfl=cfl, check_cfl=False, boundary=boundary)
        k += 1
        if isinstance(state, GraphGrid) and discrete_convexity_violation(state) > convexity_tol:
            traj.convexity_violations += 1
        traj.last_good = state
    traj.steps += k
    return state.with_values(state.values, time=target)


def run_flow(
    initial: State,
    params: FlowParams,
    t_end: float,
    *,
    sample_times: Sequence[float] | None = None,
    cfl: float = CFL_DEFAULT,
    dt_refresh: int = 1,
    eps_int: float | None = None,
    vol_floor: float = 0.0,
    callbacks: Iterable[Callable[[State], None]] = (),
    boundary=None,
    use_kernel: bool = True,
    convexity_tol: float = 1e-8,
) -> Trajectory:
    """Evolve ``initial`` to ``t_end`` and keep snapshots at ``sample_times``.

    The time step follows the CFL bound and is clipped to land exactly on each
    sample time.  Radial runs use the compiled loop (CFL recomputed every
    step); Cartesian runs recompute it every ``dt_refresh`` steps.  With
    ``vol_floor > 0`` the run stops once the flat-side volume drops below it.
    A :class:`StepFault` carries the partial trajectory as ``err.trajectory``.
    """
    from .interface import default_eps_int, extract_interface

    raw = () if sample_times is None else sample_times
    samples = sorted(set(float(t) for t in raw) | {float(t_end)})
    samples = [t for t in samples if initial.time - 1e-15 <= t <= t_end + 1e-15]
    callbacks = list(callbacks)
    eps = default_eps_int(initial) if eps_int is None else eps_int
    traj = Trajectory()

    def record(s: State):
        traj.states.append(s)
        traj.interfaces.append(extract_interface(s, eps, n=params.n))
        traj.last_good = s
        for cb in callbacks:
            cb(s)

    state = initial
    if samples and abs(samples[0] - state.time) <= 1e-15:
        record(state)
        samples = samples[1:]
    try:
        for target in samples:
            state = _advance(state, params, target, cfl, dt_refresh, boundary, use_kernel, traj, convexity_tol)
            record(state)
            if vol_floor > 0 and traj.interfaces[-1].flat_volume < vol_floor:
                traj.stopped = "T*"
                break
    except StepFault as err:
        traj.stopped = "fault"
        err.trajectory = traj
        logger.error("step fault near t=%.6g: %s", state.time, err)
        raise
    return traj
