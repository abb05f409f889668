from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from gaussflow.params import derive_exponents
from gaussflow.scenarios import ScenarioSpec, scenario_build
from gaussflow.solver import run_flow

T_RUN = 0.05
TAU = 5e-4


@lru_cache(maxsize=None)
def flat_disk_run(cells: int, samples: tuple[float, ...], t_end: float = T_RUN, n: int = 2, p: float = 1.0):
    """Flat disk R = 1, collar ((rho - 1)_+)^(1 + 1/sigma) on [0, 2], evolved to ``t_end``."""
    spec = ScenarioSpec(kind="radial_flat_disk", n=n, p=p, cells=cells, extent=2.0)
    params = spec.params
    return run_flow(scenario_build(spec), params, t_end, sample_times=samples), params


def pair_samples(t: float = T_RUN, tau: float = TAU) -> tuple[float, ...]:
    return (0.0, t - tau, t + tau)


@pytest.fixture(scope="session")
def params21():
    return derive_exponents(2, 1.0, flat_side=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Remember one acceptance verdict; printed now and again in the terminal summary."""
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
