"""State containers for the height function on radial and Cartesian grids."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass
class RadialProfile:
    """Rotationally symmetric height ``V(rho)`` on the uniform grid ``[0, rho_max]``.

    ``values[i]`` is the height at ``rho = i * dr``; ``len(values) - 1`` cells.
    """

    rho_max: float
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 4:
            raise ValueError("radial profile needs a 1-D array with at least 4 nodes")
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")

    @property
    def cells(self) -> int:
        return self.values.size - 1

    @property
    def dr(self) -> float:
        return self.rho_max / self.cells

    @property
    def spacing(self) -> float:
        return self.dr

    @property
    def rho(self) -> np.ndarray:
        return np.linspace(0.0, self.rho_max, self.values.size)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "RadialProfile":
        return replace(self, values=np.asarray(values, dtype=float), time=self.time if time is None else time)

    def apex_height(self) -> float:
        return float(self.values[0])

    def descriptor(self) -> dict:
        return {"kind": "radial", "rho_max": self.rho_max, "cells": self.cells}


@dataclass
class GraphGrid:
    """Height ``v(y1, y2)`` on a uniform Cartesian grid over ``[lo, hi]^2`` (n = 2 only).

    ``values[i, j]`` sits at ``(lo + i*dy, lo + j*dy)``: axis 0 is ``y1``.
    """

    lo: float
    hi: float
    values: np.ndarray
    time: float = 0.0
    n: int = field(default=2)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.n != 2:
            raise ValueError("Cartesian grids are limited to n = 2; use RadialProfile for n >= 3")
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1] or self.values.shape[0] < 5:
            raise ValueError("graph grid needs a square 2-D array with at least 5 nodes per side")
        if not self.hi > self.lo:
            raise ValueError("empty domain box")

    @property
    def cells(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dy(self) -> float:
        return (self.hi - self.lo) / self.cells

    @property
    def spacing(self) -> float:
        return self.dy

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.values.shape[0])

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.axis
        return np.meshgrid(a, a, indexing="ij")

    def with_values(self, values: np.ndarray, time: float | None = None) -> "GraphGrid":
        return replace(self, values=np.asarray(values, dtype=float), time=self.time if time is None else time)

    def apex_height(self) -> float:
        return float(self.values.min())

    def descriptor(self) -> dict:
        return {"kind": "cartesian", "lo": self.lo, "hi": self.hi, "cells": self.cells}


State = RadialProfile | GraphGrid


def sample_radial_to_grid(profile: RadialProfile, cells: int, half_width: float | None = None) -> GraphGrid:
    """Resample a radial profile onto a Cartesian grid by linear interpolation in rho."""
    half = profile.rho_max / np.sqrt(2.0) if half_width is None else half_width
    axis = np.linspace(-half, half, cells + 1)
    y1, y2 = np.meshgrid(axis, axis, indexing="ij")
    r = np.hypot(y1, y2)
    if r.max() > profile.rho_max * (1 + 1e-12):
        raise ValueError("Cartesian box exceeds the radial profile's extent")
    vals = np.interp(r, profile.rho, profile.values)
    return GraphGrid(-half, half, vals, time=profile.time)
