from __future__ import annotations

import math

import numpy as np
import pytest

from gaussflow.grids import GraphGrid, RadialProfile
from gaussflow.interface import (
    ExtinctionError,
    InterfaceState,
    contour_area,
    contour_perimeter,
    default_eps_int,
    estimate_Tstar,
    extract_interface,
    sphere_cap_height,
    sphere_exact_radius,
    sphere_extinction_time,
)
from gaussflow.params import derive_exponents


def test_radial_interface_radius_and_volume():
    rho = np.linspace(0, 2, 201)
    state = RadialProfile(2.0, np.maximum(rho - 0.8, 0.0))
    it = extract_interface(state, 1e-6, n=2)
    assert it.inner_radius == pytest.approx(0.8 + 1e-6, abs=1e-12)
    assert it.flat_volume == pytest.approx(math.pi * it.inner_radius**2)
    it3 = extract_interface(state, 1e-6, n=3)
    assert it3.flat_volume == pytest.approx(4 / 3 * math.pi * it.inner_radius**3)


def test_radial_without_flat_side():
    state = RadialProfile(1.0, np.linspace(1, 2, 11))
    assert extract_interface(state, 1e-6).flat_volume == 0.0


def test_cartesian_disk_area():
    grid = GraphGrid(-1.5, 1.5, np.zeros((241, 241)))
    Y1, Y2 = grid.mesh()
    grid = grid.with_values(np.maximum(np.hypot(Y1, Y2) - 1.0, 0.0))
    it = extract_interface(grid, 1e-6)
    # a kinked profile puts the level set within one cell of the true circle
    ring = 2 * math.pi * grid.dy
    assert abs(it.flat_volume - math.pi) < ring
    assert it.inner_radius == pytest.approx(1.0, abs=grid.dy)
    assert it.outer_radius == pytest.approx(1.0, abs=grid.dy)
    assert abs(contour_area(it.contour) - math.pi) < ring


def test_smooth_level_set_is_subcell_accurate():
    grid = GraphGrid(-1.5, 1.5, np.zeros((121, 121)))
    Y1, Y2 = grid.mesh()
    it = extract_interface(grid.with_values(Y1**2 + Y2**2), 1.0)
    assert contour_perimeter(it.contour) == pytest.approx(2 * math.pi, rel=1e-3)
    assert contour_area(it.contour) == pytest.approx(math.pi, rel=1e-3)
    assert it.flat_volume == pytest.approx(math.pi, rel=1e-3)


def test_polygon_measures():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert contour_area(square) == 1.0
    assert contour_perimeter(square) == 4.0


def test_eps_int_must_be_positive():
    with pytest.raises(ValueError):
        extract_interface(RadialProfile(1.0, np.zeros(11)), 0.0)


def test_default_eps_scales_with_range():
    assert default_eps_int(RadialProfile(1.0, np.linspace(0, 4, 11))) == pytest.approx(4e-6)


def test_tstar_interpolates_first_crossing():
    its = [InterfaceState(t, v) for t, v in [(0.0, 3.0), (1.0, 2.0), (2.0, 0.5), (3.0, 0.0)]]
    assert estimate_Tstar(its, 1.0) == pytest.approx(1 + 1 / 1.5)
    assert estimate_Tstar(its, 0.0) == 3.0
    assert estimate_Tstar(its[:2], 0.0) is None
    with pytest.raises(ValueError):
        estimate_Tstar([], 0.0)


@pytest.mark.parametrize("n,p", [(2, 1.0), (3, 0.5), (2, 2.0)])
def test_sphere_radius_closed_form(n, p):
    params = derive_exponents(n, p)
    k = n * p + 1
    T = sphere_extinction_time(params, 1.0)
    assert T == pytest.approx(1 / k)
    assert sphere_exact_radius(params, 1.0, 0.0) == 1.0
    assert sphere_exact_radius(params, 1.0, T) == 0.0
    t = 0.3 * T
    R = sphere_exact_radius(params, 1.0, t)
    # dR/dt = -R^(-np)
    h = 1e-6
    dR = (sphere_exact_radius(params, 1.0, t + h) - sphere_exact_radius(params, 1.0, t - h)) / (2 * h)
    assert dR == pytest.approx(-(R ** (-n * p)), rel=1e-6)
    with pytest.raises(ExtinctionError):
        sphere_exact_radius(params, 1.0, 1.01 * T)


def test_sphere_cap_apex_is_zero_at_start():
    params = derive_exponents(2, 1.0)
    h = sphere_cap_height(params, 1.0, 0.0, np.linspace(0, 0.5, 11))
    assert h[0] == 0.0 and np.all(np.diff(h) > 0)
