from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import FlowDomainError, FlowParams


class TransformFault(RuntimeError):
    """A transform precondition failed at a specific node."""


def require_sigma(params: FlowParams) -> float:
    if not params.persistent:
        raise FlowDomainError(f"sigma_p={params.sigma_p:.6g} <= 0: transform exponents undefined")
    return params.sigma_p


@dataclass
class Residual:
    """Pointwise residual with NaN at skipped nodes."""

    values: np.ndarray
    mask: np.ndarray
    skipped: int

    def sup(self, region: np.ndarray | None = None) -> float:
        sel = self.mask if region is None else (self.mask & region)
        if not sel.any():
            return float("nan")
        return float(np.max(np.abs(self.values[sel])))

    @property
    def evaluated(self) -> int:
        return int(np.count_nonzero(self.mask))


def centered_time_derivative(a: np.ndarray, b: np.ndarray, t_a: float, t_b: float):
    """Midpoint value and difference quotient of two adjacent snapshots."""
    if t_b == t_a:
        raise ValueError("snapshots share a time stamp")
    return 0.5 * (a + b), (b - a) / (t_b - t_a), 0.5 * (t_a + t_b)
