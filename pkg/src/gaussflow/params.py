"""Flow parameters, derived exponents and the closed-form regularity classifiers.

The only derived quantity is ``sigma_p = n - 1/p``.  Everything downstream
(the pressure power, the rescaled radial variable, the Hodograph weight
``y_{n+1}^{2/sigma_p}``) is a function of it, and so is the regularity of the
graph up to the flat-side interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

INTEGER_TOL = 1e-9


class FlowDomainError(ValueError):
    """Raised for parameter combinations outside the flat-side regime."""


def near_integer(x: float, tol: float = INTEGER_TOL) -> bool:
    return abs(x - round(x)) <= tol


def floor_strict(x: float, tol: float = INTEGER_TOL) -> int:
    """Greatest integer strictly less than ``x`` (integers within ``tol`` count as integers)."""
    k = round(x)
    if abs(x - k) <= tol:
        return int(k) - 1
    return math.floor(x)


@dataclass(frozen=True)
class FlowParams:
    n: int
    p: float
    t_horizon: float = 0.0
    sigma_p: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.n, (int,)) or isinstance(self.n, bool):
            raise FlowDomainError(f"n must be an integer, got {self.n!r}")
        if not (math.isfinite(self.p) and math.isfinite(self.t_horizon)):
            raise FlowDomainError("p and t_horizon must be finite")
        if self.n < 2:
            raise FlowDomainError(f"n must be >= 2, got {self.n}")
        if self.p <= 0:
            raise FlowDomainError(f"p must be > 0, got {self.p}")
        if self.t_horizon < 0:
            raise FlowDomainError(f"t_horizon must be >= 0, got {self.t_horizon}")
        object.__setattr__(self, "sigma_p", self.n - 1.0 / self.p)

    @property
    def persistent(self) -> bool:
        """True when a flat side survives for positive time (p > 1/n)."""
        return self.sigma_p > INTEGER_TOL

    @property
    def speed_exponent(self) -> float:
        """Exponent ((n+2)p - 1)/2 of the gradient factor in the graph equation."""
        return ((self.n + 2) * self.p - 1.0) / 2.0

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "t_horizon": self.t_horizon, "sigma_p": self.sigma_p}

    @classmethod
    def from_dict(cls, d: dict) -> "FlowParams":
        return cls(n=int(d["n"]), p=float(d["p"]), t_horizon=float(d.get("t_horizon", 0.0)))


def derive_exponents(n: int, p: float, *, flat_side: bool = False, t_horizon: float = 0.0) -> FlowParams:
    """Build :class:`FlowParams`; with ``flat_side=True`` reject ``p <= 1/n``."""
    params = FlowParams(n=n, p=p, t_horizon=t_horizon)
    if flat_side and not params.persistent:
        raise FlowDomainError(
            f"p={p} <= 1/n={1.0 / n:.6g}: sigma_p={params.sigma_p:.3g} <= 0, "
            "no persistent flat side for this (n, p)"
        )
    return params


@dataclass(frozen=True)
class RegularityClass:
    variable: str
    smooth: bool
    order: int | None
    holder_exponent: float | None
    k0: int
    beta0: float | None

    def label(self) -> str:
        if self.smooth:
            return f"{self.variable} in C^infinity up to the interface"
        if self.variable == "g":
            return f"g in C_mu^{{{self.order}, 2+{self.holder_exponent:.6g}}}"
        return f"v in C^{{{self.order}, {self.holder_exponent:.6g}}}"

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "smooth": self.smooth,
            "order": self.order,
            "holder_exponent": self.holder_exponent,
            "k0": self.k0,
            "beta0": self.beta0,
            "label": self.label(),
        }


def _require_persistent(params: FlowParams) -> None:
    if not params.persistent:
        raise FlowDomainError(f"sigma_p={params.sigma_p:.6g} <= 0: no regularity class is defined")


def _k0_beta0(sigma: float) -> tuple[int, float | None]:
    two_over = 2.0 / sigma
    k0 = floor_strict(two_over)
    if near_integer(two_over):
        return k0, None
    return k0, min(1.0, 2.0 * two_over - 2.0 * math.floor(two_over))


def classify_g_regularity(params: FlowParams) -> RegularityClass:
    """Regularity of the pressure up to the interface, driven by ``2/sigma_p``."""
    _require_persistent(params)
    two_over = 2.0 / params.sigma_p
    k0, beta0 = _k0_beta0(params.sigma_p)
    if near_integer(two_over) and round(two_over) >= 1:
        return RegularityClass("g", True, None, None, k0, None)
    return RegularityClass("g", False, math.floor(two_over), beta0, k0, beta0)


def classify_v_regularity(params: FlowParams) -> RegularityClass:
    """Regularity of the height function, driven by ``1/sigma_p``."""
    _require_persistent(params)
    one_over = 1.0 / params.sigma_p
    k0, beta0 = _k0_beta0(params.sigma_p)
    if near_integer(one_over) and round(one_over) >= 1:
        return RegularityClass("v", True, None, None, k0, beta0)
    whole = math.floor(one_over)
    return RegularityClass("v", False, 1 + whole, one_over - whole, k0, beta0)
