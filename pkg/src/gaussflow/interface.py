"""Flat-side interface extraction, flat-volume tracking and the sphere oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .grids import RadialProfile, State
from .params import FlowParams

EPS_INT_REL = 1e-6


@dataclass
class InterfaceState:
    time: float
    flat_volume: float
    contour: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    inner_radius: float = 0.0
    outer_radius: float = 0.0
    eps_int: float = 0.0

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "flat_volume": self.flat_volume,
            "inner_radius": self.inner_radius,
            "outer_radius": self.outer_radius,
            "eps_int": self.eps_int,
            "contour_points": int(len(self.contour)),
        }


def ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n


def default_eps_int(state: State) -> float:
    scale = float(np.max(state.values) - np.min(state.values))
    return EPS_INT_REL * (scale if scale > 0 else 1.0)


def radial_crossing(state: RadialProfile, level: float) -> float | None:
    """Radius where the nondecreasing profile first reaches ``level`` (None if never)."""
    V = state.values
    above = np.nonzero(V >= level)[0]
    if above.size == 0:
        return None
    i = int(above[0])
    if i == 0:
        return 0.0
    v0, v1 = V[i - 1], V[i]
    return (i - 1 + (level - v0) / (v1 - v0)) * state.dr


def cell_fraction_area(values: np.ndarray, level: float, dy: float) -> float:
    """Area of ``{v < level}`` by cell counting with a linear correction in cut cells."""
    c = values - level
    corners = np.stack([c[:-1, :-1], c[1:, :-1], c[:-1, 1:], c[1:, 1:]])
    neg = np.maximum(-corners, 0.0).sum(axis=0)
    tot = np.abs(corners).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(tot > 0, neg / np.where(tot > 0, tot, 1.0), 1.0)
    return float(frac.sum() * dy**2)


def extract_interface(state: State, eps_int: float, n: int = 2) -> InterfaceState:
    """Locate ``{v = eps_int}`` and measure the flat-side volume ``{v < eps_int}``.

    Radial profiles report the crossing radius as both inner and outer radius
    and ``n`` sets the ball dimension of the flat volume.
    """
    if not eps_int > 0:
        raise ValueError("eps_int must be positive")
    if isinstance(state, RadialProfile):
        r = radial_crossing(state, eps_int)
        if r is None:
            r = state.rho_max
        if r == 0.0:
            return InterfaceState(state.time, 0.0, np.zeros((0, 2)), 0.0, 0.0, eps_int)
        contour = np.array([[r, 0.0]])
        return InterfaceState(state.time, ball_volume(n, r), contour, r, r, eps_int)

    v = state.values
    if v.min() >= eps_int:
        return InterfaceState(state.time, 0.0, np.zeros((0, 2)), 0.0, 0.0, eps_int)
    area = cell_fraction_area(v, eps_int, state.dy)
    contours = measure.find_contours(v, eps_int)
    if not contours:
        return InterfaceState(state.time, area, np.zeros((0, 2)), 0.0, 0.0, eps_int)
    # the flat side is one convex set: keep the longest closed contour
    contour = max(contours, key=len)
    pts = state.lo + contour * state.dy
    radii = np.hypot(pts[:, 0], pts[:, 1])
    return InterfaceState(state.time, area, pts, float(radii.min()), float(radii.max()), eps_int)


def contour_perimeter(contour: np.ndarray) -> float:
    if len(contour) < 2:
        return 0.0
    d = np.diff(np.vstack([contour, contour[:1]]), axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def contour_area(contour: np.ndarray) -> float:
    x, y = contour[:, 0], contour[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def estimate_Tstar(interfaces, vol_floor: float) -> float | None:
    """Linearly interpolated first time the flat volume falls to ``vol_floor``."""
    if not interfaces:
        raise ValueError("empty trajectory")
    prev = None
    for it in interfaces:
        if it.flat_volume <= vol_floor:
            if prev is None:
                return it.time
            v0, v1 = prev.flat_volume, it.flat_volume
            if v0 == v1:
                return it.time
            return prev.time + (v0 - vol_floor) / (v0 - v1) * (it.time - prev.time)
        prev = it
    return None


class ExtinctionError(ValueError):
    def __init__(self, t: float, extinction: float):
        super().__init__(f"t={t:.6g} is past the extinction time {extinction:.6g}")
        self.extinction_time = extinction


def sphere_extinction_time(params: FlowParams, R0: float) -> float:
    k = params.n * params.p + 1.0
    return R0**k / k


def sphere_exact_radius(params: FlowParams, R0: float, t: float) -> float:
    """Radius of a sphere shrinking with normal speed ``R^(-np)``."""
    if R0 <= 0:
        raise ValueError("R0 must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    k = params.n * params.p + 1.0
    T = R0**k / k
    if t > T * (1 + 1e-14):
        raise ExtinctionError(t, T)
    return max(R0**k - k * t, 0.0) ** (1.0 / k)


def sphere_cap_height(params: FlowParams, R0: float, t: float, rho, center: float | None = None):
    """Lower cap ``c - sqrt(R(t)^2 - rho^2)`` of the shrinking sphere; ``c`` defaults to ``R0``."""
    R = sphere_exact_radius(params, R0, t)
    c = R0 if center is None else center
    return c - np.sqrt(R**2 - np.asarray(rho, dtype=float) ** 2)
