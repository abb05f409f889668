"""The singular parabolic distance on the half-space times time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MuPoint:
    x_prime: tuple[float, ...]
    x_n: float
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x_prime", tuple(float(c) for c in np.atleast_1d(self.x_prime)))
        if not self.x_n >= 0:
            raise ValueError(f"x_n must be nonnegative, got {self.x_n}")


def mu_distance(a: MuPoint, b: MuPoint) -> float:
    """``|x' - y'| + |sqrt(x_n) - sqrt(y_n)| + sqrt(|t - s|)``."""
    if len(a.x_prime) != len(b.x_prime):
        raise ValueError("points live in different dimensions")
    tang = float(np.linalg.norm(np.subtract(a.x_prime, b.x_prime)))
    return tang + abs(np.sqrt(a.x_n) - np.sqrt(b.x_n)) + np.sqrt(abs(a.t - b.t))


def mu_distance_arrays(xp1, xn1, t1, xp2, xn2, t2) -> np.ndarray:
    """Vectorized distance; ``xp`` arrays have shape ``(k, n-1)``."""
    xn1 = np.asarray(xn1, dtype=float)
    xn2 = np.asarray(xn2, dtype=float)
    if np.any(xn1 < 0) or np.any(xn2 < 0):
        raise ValueError("x_n must be nonnegative")
    tang = np.linalg.norm(np.asarray(xp1, dtype=float) - np.asarray(xp2, dtype=float), axis=-1)
    return tang + np.abs(np.sqrt(xn1) - np.sqrt(xn2)) + np.sqrt(np.abs(np.asarray(t1) - np.asarray(t2)))
