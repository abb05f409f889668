"""Weighted difference quotient of the top derivative near the interface."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..grids import RadialProfile, State
from ..params import FlowParams, classify_v_regularity
from ..transforms.hodograph import pressure_interface_radius
from ..transforms.pressure import to_pressure

PAIRS_DEFAULT = 100_000
MIN_BAND_POINTS = 8


class BandError(ValueError):
    pass


def _derivative_tensor(state: State, order: int) -> np.ndarray:
    """All partial derivatives of the given order by repeated central differences.

    Radial profiles give the single radial derivative; Cartesian grids give
    an array of shape ``(2,)*order + grid shape``.
    """
    d = state.spacing
    if isinstance(state, RadialProfile):
        f = state.values
        for _ in range(order):
            f = np.gradient(f, d)
        return f[None]
    comps = [state.values]
    for _ in range(order):
        comps = [c for f in comps for c in np.gradient(f, d, d)]
    return np.stack(comps)


def _distance(state: State, params: FlowParams) -> np.ndarray:
    if isinstance(state, RadialProfile):
        r0 = pressure_interface_radius(to_pressure(state, params))
        return np.clip(state.rho - r0, 0.0, None)
    return ndimage.distance_transform_edt(state.values > 0) * state.dy


def _coords(state: State) -> np.ndarray:
    if isinstance(state, RadialProfile):
        return state.rho[:, None]
    Y1, Y2 = state.mesh()
    return np.stack([Y1, Y2], axis=-1)


def intermediate_estimate_sup(states: list[State], params: FlowParams, time_window: tuple[float, float] | None = None,
                              band: tuple[float, float] = (0.0, 1.0), pairs: int = PAIRS_DEFAULT, seed: int = 0,
                              margin: int = 3) -> float:
    """Sup over snapshots and random node pairs in ``{band[0] < v < band[1]}`` of

    ``min(d, d~)^(1 + 1/sigma) |D^{k0+2} v(y) - D^{k0+2} v(y~)| / |y - y~|^(2/sigma - k0)``.

    Nodes within ``margin`` cells of the stored flat set are left out so the
    difference stencils never straddle the interface.
    """
    cls = classify_v_regularity(params)
    k0 = cls.k0
    sigma = params.sigma_p
    expo = 2.0 / sigma - k0
    rng = np.random.default_rng(seed)
    best = 0.0
    seen = 0
    for s in states:
        if time_window is not None and not (time_window[0] <= s.time <= time_window[1]):
            continue
        seen += 1
        v = s.values
        dist = _distance(s, params)
        flat = v <= 0
        grown = ndimage.binary_dilation(flat, iterations=margin) if flat.any() else flat
        edge = np.zeros(v.shape, dtype=bool)
        sl = tuple(slice(k0 + 2, -(k0 + 2)) for _ in v.shape)
        edge[sl] = True
        sel = (v > band[0]) & (v < band[1]) & ~grown & edge & (dist > 0)
        idx = np.argwhere(sel)
        if len(idx) < MIN_BAND_POINTS:
            raise BandError(f"only {len(idx)} band points at t={s.time:.6g}")
        D = _derivative_tensor(s, k0 + 2)
        X = _coords(s)
        i = idx[rng.integers(0, len(idx), size=pairs)]
        j = idx[rng.integers(0, len(idx), size=pairs)]
        ti, tj = tuple(i.T), tuple(j.T)
        sep = np.linalg.norm(X[ti] - X[tj], axis=-1)
        keep = sep > 0
        diff = np.linalg.norm((D[(slice(None),) + ti] - D[(slice(None),) + tj]).T, axis=-1)
        w = np.minimum(dist[ti], dist[tj]) ** (1.0 + 1.0 / sigma)
        q = w[keep] * diff[keep] / sep[keep] ** expo
        if q.size:
            best = max(best, float(np.max(q)))
    if seen == 0:
        raise BandError("no snapshot inside the time window")
    return best
