"""Initial surfaces with a flat side, plus the sphere-cap oracle profile."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .grids import GraphGrid, RadialProfile, State
from .params import FlowParams, derive_exponents

logger = logging.getLogger(__name__)

KINDS = ("radial_flat_disk", "cap_sphere", "perturbed_flat_disk", "custom_file")


class ScenarioError(ValueError):
    """A scenario whose parameters are invalid or fail an initial-condition precheck."""

    def __init__(self, message: str, condition: str | None = None, key: str | None = None):
        super().__init__(message)
        self.condition = condition
        self.key = key


@dataclass
class ScenarioSpec:
    """Everything needed to rebuild an initial state.

    ``radius`` is the flat radius ``R`` (or the sphere radius for
    ``cap_sphere``), ``collar`` the amplitude ``c``.  ``gamma=None`` selects
    the collar exponent ``1 + 1/sigma_p``.  ``extent`` is ``rho_max`` for
    radial grids and the half width for Cartesian ones.
    """

    kind: str = "radial_flat_disk"
    name: str = ""
    n: int = 2
    p: float = 1.0
    radius: float = 1.0
    collar: float = 1.0
    gamma: float | None = None
    amplitude: float = 0.0
    mode: int = 0
    cells: int = 256
    extent: float | None = None
    path: str | None = None
    precheck: bool = True
    params: FlowParams = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}", key="kind")
        if not self.name:
            self.name = self.kind
        self.params = derive_exponents(int(self.n), float(self.p), flat_side=self.kind != "cap_sphere")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("params")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        allowed = {f for f in cls.__dataclass_fields__ if f != "params"}
        for key in d:
            if key not in allowed:
                raise ScenarioError(f"unknown scenario key {key!r}", key=key)
        return cls(**d)


def _collar_gamma(spec: ScenarioSpec) -> float:
    return 1.0 + 1.0 / spec.params.sigma_p if spec.gamma is None else float(spec.gamma)


def _radial_flat_disk(spec: ScenarioSpec) -> RadialProfile:
    rho_max = 2.0 * spec.radius if spec.extent is None else float(spec.extent)
    if rho_max <= spec.radius:
        raise ScenarioError(f"extent {rho_max} must exceed the flat radius {spec.radius}")
    rho = np.linspace(0.0, rho_max, spec.cells + 1)
    values = spec.collar * np.maximum(rho - spec.radius, 0.0) ** _collar_gamma(spec)
    return RadialProfile(rho_max, values)


def _cap_sphere(spec: ScenarioSpec) -> RadialProfile:
    """Lower cap of the sphere of radius ``R0`` with the apex shifted to height 0."""
    R0 = spec.radius
    rho_max = 0.5 * R0 if spec.extent is None else float(spec.extent)
    if rho_max >= R0:
        raise ScenarioError(f"cap extent {rho_max} must stay below the sphere radius {R0}")
    rho = np.linspace(0.0, rho_max, spec.cells + 1)
    return RadialProfile(rho_max, R0 - np.sqrt(R0**2 - rho**2))


def perturbed_gauge(y1, y2, radius: float, amplitude: float, mode: int):
    """``|y| / (R (1 + a cos(m theta)))``: equals 1 on the boundary of the flat set."""
    theta = np.arctan2(y2, y1)
    return np.hypot(y1, y2) / (radius * (1.0 + amplitude * np.cos(mode * theta)))


def _perturbed_flat_disk(spec: ScenarioSpec) -> GraphGrid:
    if spec.n != 2:
        raise ScenarioError("perturbed_flat_disk is a Cartesian scenario and needs n = 2")
    a, m = float(spec.amplitude), int(spec.mode)
    if not 0.0 <= abs(a) < 1.0 or m < 0:
        raise ScenarioError(f"perturbation amplitude {a} / mode {m} out of range")
    # polar curve r(theta) is convex iff r^2 + 2 r'^2 - r r'' > 0
    th = np.linspace(0.0, 2.0 * np.pi, 721)
    r = 1.0 + a * np.cos(m * th)
    dr, ddr = -a * m * np.sin(m * th), -a * m * m * np.cos(m * th)
    if np.min(r * r + 2.0 * dr * dr - r * ddr) <= 0.0:
        raise ScenarioError(f"amplitude {a} with mode {m} makes the flat set non-convex", condition="I1")
    half = 1.5 * spec.radius * (1.0 + abs(a)) if spec.extent is None else float(spec.extent)
    axis = np.linspace(-half, half, spec.cells + 1)
    y1, y2 = np.meshgrid(axis, axis, indexing="ij")
    psi = perturbed_gauge(y1, y2, spec.radius, a, m)
    values = spec.collar * (spec.radius * np.maximum(psi - 1.0, 0.0)) ** _collar_gamma(spec)
    return GraphGrid(-half, half, values)


def scenario_build(spec: ScenarioSpec) -> State:
    """Construct the initial state and, for flat-side scenarios, precheck (I1)/(I2).

    Raises :class:`ScenarioError` naming the failing condition.
    """
    if spec.kind == "custom_file":
        if not spec.path:
            raise ScenarioError("custom_file scenario needs a path", key="path")
        from .io import load_snapshot

        state, _, _ = load_snapshot(spec.path)
    else:
        if not (math.isfinite(spec.radius) and spec.radius > 0):
            raise ScenarioError(f"radius must be positive, got {spec.radius}", key="radius")
        if not spec.collar > 0:
            raise ScenarioError(f"collar amplitude must be positive, got {spec.collar}", key="collar")
        if spec.cells < 8:
            raise ScenarioError(f"need at least 8 cells, got {spec.cells}", key="cells")
        builder = {"radial_flat_disk": _radial_flat_disk, "cap_sphere": _cap_sphere,
                   "perturbed_flat_disk": _perturbed_flat_disk}[spec.kind]
        state = builder(spec)
    if spec.kind != "cap_sphere" and spec.precheck:
        precheck_initial(state, spec.params)
    return state


def precheck_initial(state: State, params: FlowParams) -> None:
    """Reject states that fail the curvature (I1) or gradient (I2) precheck."""
    from .analysis.conditions import check_initial_conditions

    if not np.any(state.values <= 0.0):
        raise ScenarioError("the initial surface has no flat side", condition="I1")
    report = check_initial_conditions(state, params, pairs=2000)
    for cond in ("I1", "I2"):
        failing = [k for k, c in report.checks.items() if k.startswith(cond) and c.passed is False]
        if failing:
            detail = ", ".join(f"{k}={report.checks[k].value}" for k in failing)
            raise ScenarioError(f"initial condition {cond} fails ({detail})", condition=cond)
    logger.debug("initial prechecks passed: %s", {k: c.value for k, c in report.checks.items()})
