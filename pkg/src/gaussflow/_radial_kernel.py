"""Compiled forward-Euler loop for radial profiles.

Mirrors ``rhs_radial`` and ``max_parabolic_coefficient`` node for node; the
numpy versions remain the reference and the tests compare the two.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

BOUNDARY_COPY = 0
BOUNDARY_SPHERE = 1


@njit(cache=True)
def _sphere_boundary(t, bparams):
    R0, center, rho_max, k = bparams[0], bparams[1], bparams[2], bparams[3]
    R = max(R0**k - k * t, 0.0) ** (1.0 / k)
    return center - math.sqrt(max(R * R - rho_max * rho_max, 0.0))


@njit(cache=True)
def advance_radial(V, dr, n, p, kexp, t, t_target, cfl, bmode, bparams, max_steps):
    """Step ``V`` in place from ``t`` to ``t_target``; returns ``(t, steps, status)``.

    status 0 = reached target, 1 = non-finite rhs, 2 = step budget exhausted.
    """
    N = V.size - 1
    vrr = np.empty(N)
    tang = np.empty(N)
    slope = np.empty(N)
    r = np.empty(N + 1)
    steps = 0
    unit_p = p == 1.0
    m = int(round(2.0 * kexp))
    half_int = abs(2.0 * kexp - m) < 1e-14 and m >= 0
    while t < t_target - 1e-15 * max(1.0, t_target):
        if steps >= max_steps:
            return t, steps, 2
        vrr[0] = 2.0 * (V[1] - V[0]) / (dr * dr)
        slope[0] = 0.0
        for i in range(1, N):
            vrr[i] = (V[i + 1] - 2.0 * V[i] + V[i - 1]) / (dr * dr)
            slope[i] = (V[i + 1] - V[i - 1]) / (2.0 * dr)
        for i in range(1, N - 1):
            if V[i] == 0.0 and V[i - 1] == 0.0 and V[i + 1] > 0.0:
                vrr[i] = (V[i + 2] - 2.0 * V[i + 1] + V[i]) / (dr * dr)
        tang[0] = vrr[0]
        for i in range(1, N):
            tang[i] = slope[i] / (i * dr)
        coef_max = 0.0
        for i in range(N):
            A = max(vrr[i], 0.0)
            B = max(tang[i], 0.0)
            det = A * B ** (n - 1)
            x = 1.0 + slope[i] * slope[i]
            if half_int:
                w = math.sqrt(x) ** m
            else:
                w = x**kexp
            if unit_p:
                r[i] = det / w
            else:
                r[i] = det**p / w
            if det > 0.0:
                dp = 1.0 if unit_p else p * det ** (p - 1.0)
                c = (dp * B ** (n - 1) + dp * (n - 1) * A * B ** (n - 2)) / w
                if c > coef_max:
                    coef_max = c
            if not math.isfinite(r[i]):
                return t, steps, 1
        r[N] = r[N - 1]
        if coef_max > 0.0:
            dt = cfl * dr * dr / coef_max
        else:
            dt = t_target - t
        if dt > t_target - t:
            dt = t_target - t
        for i in range(N):
            V[i] += dt * r[i]
        t += dt
        if bmode == BOUNDARY_SPHERE:
            V[N] = _sphere_boundary(t, bparams)
        else:
            V[N] += dt * r[N]
        steps += 1
    return t, steps, 0
