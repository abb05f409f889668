"""Log-log power-law fits."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

MIN_SAMPLES = 8


class FitError(ValueError):
    pass


@dataclass
class ExponentFit:
    exponent: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]
    used: int
    excluded: int

    def to_dict(self) -> dict:
        return asdict(self)


def fit_power_law(d, values=None, window: tuple[float, float] | None = None) -> ExponentFit:
    """Least-squares line through ``(log d, log value)``; the slope is the exponent.

    Accepts either two arrays or one sequence of ``(d, value)`` pairs.  Pairs
    with ``d <= 0`` or ``value <= 0`` (or non-finite) are dropped and counted.
    """
    if values is None:
        arr = np.asarray(d, dtype=float).reshape(-1, 2)
        d, values = arr[:, 0], arr[:, 1]
    d = np.asarray(d, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if d.shape != values.shape:
        raise ValueError("d and values differ in length")
    inside = np.ones(d.shape, dtype=bool)
    if window is not None:
        inside = (d >= window[0]) & (d <= window[1])
    good = inside & np.isfinite(d) & np.isfinite(values) & (d > 0) & (values > 0)
    excluded = int(np.count_nonzero(inside & ~good))
    used = int(np.count_nonzero(good))
    if used < MIN_SAMPLES:
        raise FitError(f"only {used} usable samples (need {MIN_SAMPLES})")
    x = np.log(d[good])
    y = np.log(values[good])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    win = (float(d[good].min()), float(d[good].max())) if window is None else (float(window[0]), float(window[1]))
    return ExponentFit(float(slope), float(np.exp(icpt)), r2, win, used, excluded)
