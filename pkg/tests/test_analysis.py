from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussflow.analysis.conditions import (
    check_degenerate_operator_hypotheses,
    check_initial_conditions,
    check_matrix_pinch,
    check_transversality,
    three_point_curvature,
)
from gaussflow.analysis.fits import FitError, fit_power_law
from gaussflow.analysis.holder import (
    Box,
    FunctionSampler,
    holder_norm_c2alpha_mu,
    holder_norm_higher,
    multi_indices,
    polynomial_jet,
)
from gaussflow.analysis.intermediate import BandError, intermediate_estimate_sup
from gaussflow.analysis.metric import MuPoint, mu_distance, mu_distance_arrays
from gaussflow.analysis.report import Check, ConditionReport, VerificationReport, write_report
from gaussflow.analysis.suite import (
    exponent_recovery,
    interface_kinematics,
    sphere_oracle,
    verify_trajectory,
)
from gaussflow.grids import RadialProfile
from gaussflow.interface import InterfaceState, sphere_cap_height
from gaussflow.scenarios import ScenarioSpec, scenario_build

from conftest import flat_disk_run


# ---------------------------------------------------------------------------
# fits


@given(gamma=st.floats(0.2, 4.0), c=st.floats(0.1, 10.0))
def test_fit_recovers_exact_power_law(gamma, c):
    d = np.geomspace(1e-3, 1.0, 30)
    fit = fit_power_law(d, c * d**gamma)
    assert fit.exponent == pytest.approx(gamma, rel=1e-10)
    assert fit.prefactor == pytest.approx(c, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_window_and_exclusions():
    d = np.concatenate([np.geomspace(0.01, 0.1, 20), [-1.0, 0.0, 0.05, 5.0]])
    v = np.concatenate([d[:20] ** 2, [1.0, 1.0, -1.0, 25.0]])
    fit = fit_power_law(d, v, window=(0.01, 0.1))
    assert fit.exponent == pytest.approx(2.0)
    assert fit.used == 20 and fit.excluded == 1
    pairs = fit_power_law(list(zip(d[:20], v[:20])))
    assert pairs.exponent == pytest.approx(2.0)


def test_fit_needs_enough_samples():
    with pytest.raises(FitError):
        fit_power_law(np.arange(1, 5.0), np.arange(1, 5.0))
    with pytest.raises(ValueError):
        fit_power_law(np.arange(1, 12.0), np.arange(1, 10.0))


# ---------------------------------------------------------------------------
# metric


def test_mu_distance_of_simple_points():
    a = MuPoint((0.0,), 0.0, 0.0)
    b = MuPoint((3.0,), 4.0, 9.0)
    assert mu_distance(a, b) == 3.0 + 2.0 + 3.0
    assert mu_distance(a, a) == 0.0
    with pytest.raises(ValueError):
        MuPoint((0.0,), -1.0, 0.0)
    with pytest.raises(ValueError):
        mu_distance(a, MuPoint((0.0, 0.0), 0.0, 0.0))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 3))
def test_mu_metric_axioms(seed, dim):
    rng = np.random.default_rng(seed)
    k = 10_000
    pts = [(rng.normal(size=(k, dim)), rng.exponential(size=k), rng.normal(size=k)) for _ in range(3)]
    dab = mu_distance_arrays(*pts[0], *pts[1])
    dba = mu_distance_arrays(*pts[1], *pts[0])
    dbc = mu_distance_arrays(*pts[1], *pts[2])
    dac = mu_distance_arrays(*pts[0], *pts[2])
    assert np.all(dab >= 0)
    assert np.array_equal(dab, dba)
    assert np.all(dac <= dab + dbc + 1e-12)
    assert np.all(mu_distance_arrays(*pts[0], *pts[0]) == 0)


def test_mu_scaling():
    # mu(lam x', lam^2 x_n, lam^2 t) = lam mu
    a = MuPoint((0.3,), 0.2, 0.1)
    b = MuPoint((0.5,), 0.7, 0.4)
    lam = 3.0
    sa = MuPoint((lam * 0.3,), lam**2 * 0.2, lam**2 * 0.1)
    sb = MuPoint((lam * 0.5,), lam**2 * 0.7, lam**2 * 0.4)
    assert mu_distance(sa, sb) == pytest.approx(lam * mu_distance(a, b))


# ---------------------------------------------------------------------------
# Hölder norms


BOX = Box(-1.0, 1.0, 0.0, 1.0, 0.0, 1.0)


def test_holder_norm_of_a_constant():
    sampler = FunctionSampler(polynomial_jet({((0, 0), 0): 2.5}, 2), 2, BOX)
    rep = holder_norm_c2alpha_mu(sampler, pairs=4096)
    assert rep.norm == pytest.approx(2.5)
    assert all(v["quotient"] == 0.0 for v in rep.terms.values())
    assert rep.pairs + rep.skipped == 4096


def test_holder_norm_of_a_tangential_quadratic():
    # U = x1^2: U_11 = 2 is constant, U_1 = 2 x1 is Lipschitz in the tangential direction
    sampler = FunctionSampler(polynomial_jet({((2, 0), 0): 1.0}, 2), 2, BOX)
    rep = holder_norm_c2alpha_mu(sampler, alpha=0.5, pairs=8192)
    t = rep.terms
    assert t["U_11"]["sup"] == 2.0 and t["U_11"]["quotient"] == 0.0
    assert t["U_1"]["sup"] <= 2.0
    diam = 2.0 + 1.0 + 1.0
    assert 0 < t["U_1"]["quotient"] <= 2.0 * diam**0.5
    assert t["xn*U_nn"]["sup"] == 0.0


def test_holder_norm_of_a_normal_quadratic():
    # U = x_n^2: the weighted term x_n U_nn = 2 x_n is Hölder-1/2 in mu
    sampler = FunctionSampler(polynomial_jet({((0, 2), 0): 1.0}, 2), 2, BOX)
    rep = holder_norm_c2alpha_mu(sampler, alpha=0.5, pairs=8192, seed=3)
    term = rep.terms["xn*U_nn"]
    assert term["sup"] <= 2.0
    # |2x - 2y| = 2 |sqrt x - sqrt y| (sqrt x + sqrt y) <= 4 mu^(1/2) mu^(1/2) on [0, 1]
    assert term["quotient"] <= 4.0


def test_holder_norm_is_monotone_in_pair_count():
    sampler = FunctionSampler(polynomial_jet({((1, 2), 1): 1.0, ((3, 0), 0): 0.5}, 2), 2, BOX)
    norms = [holder_norm_c2alpha_mu(sampler, pairs=k, seed=11).norm for k in (1000, 3000, 9000)]
    assert norms == sorted(norms)
    again = holder_norm_c2alpha_mu(sampler, pairs=3000, seed=11).norm
    assert again == norms[1]


def test_holder_rejects_bad_alpha_and_box():
    sampler = FunctionSampler(polynomial_jet({((0, 0), 0): 1.0}, 2), 2, BOX)
    with pytest.raises(ValueError):
        holder_norm_c2alpha_mu(sampler, alpha=1.0)
    with pytest.raises(ValueError):
        Box(0, 1, -0.1, 1, 0, 1)


def test_higher_norm_sums_derivative_reports():
    assert len(multi_indices(2, 0)) == 1
    # |gamma| + 2s <= 2 in two variables: 1 + 2 + 3 + 1
    assert len(multi_indices(2, 2)) == 7
    sampler = FunctionSampler(polynomial_jet({((2, 1), 0): 1.0}, 2), 2, BOX)
    base = holder_norm_c2alpha_mu(sampler, pairs=2048)
    higher = holder_norm_higher(sampler, 1, pairs=2048)
    assert len(higher.terms) == 3
    assert higher.norm >= base.norm
    with pytest.raises(ValueError):
        holder_norm_higher(sampler, -1)


# ---------------------------------------------------------------------------
# non-degeneracy and operator checks


def test_three_point_curvature_of_circle():
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    circle = np.column_stack([2 * np.cos(th), 2 * np.sin(th)])
    np.testing.assert_allclose(three_point_curvature(circle), 0.5, rtol=1e-12)
    assert three_point_curvature(circle[:2]).size == 0


def test_initial_conditions_pass_for_flat_disk(params21):
    state = scenario_build(ScenarioSpec(kind="radial_flat_disk", n=2, p=1.0, cells=256))
    rep = check_initial_conditions(state, params21, pairs=2000)
    assert rep.passed, rep.to_dict()
    # level sets of small height sit just outside the unit flat disk
    assert 0.95 < rep.checks["I1_curvature_min"].value <= 1.0


def test_initial_conditions_flag_degenerate_pressure(params21):
    rho = np.linspace(0, 2, 257)
    state = RadialProfile(2.0, np.maximum(rho - 1, 0) ** 3)
    rep = check_initial_conditions(state, params21, pairs=2000)
    assert not rep.checks["I2_grad_min"].passed


def test_transversality_on_flat_disk_run(params21):
    traj, _ = flat_disk_run(256, (0.0, 0.02, 0.04), t_end=0.04)
    rep = check_transversality(traj.states, params21)
    assert rep.passed, rep.to_dict()
    single = check_transversality(traj.states[-1:], params21)
    assert single.passed
    with pytest.raises(ValueError):
        check_transversality([], params21)


def test_matrix_pinch():
    M = np.broadcast_to(np.diag([0.5, 2.0]), (4, 4, 2, 2)).copy()
    rep = check_matrix_pinch(M)
    assert rep.passed
    assert rep.checks["eig_min"].value == pytest.approx(0.5)
    M[0, 0] = np.nan
    assert check_matrix_pinch(M).measured["skipped"] == 1
    assert not check_matrix_pinch(np.diag([0.01, 1.0])).passed


def test_degenerate_operator_hypotheses_on_model_operator():
    k = 50
    x_n = np.linspace(0, 1, k)
    a = np.broadcast_to(np.eye(2), (k, 2, 2))
    b = np.column_stack([np.zeros(k), np.ones(k)])
    rep = check_degenerate_operator_hypotheses(a, b, x_n)
    assert rep.passed
    assert rep.checks["drift_ratio"].value == pytest.approx(2.0)
    weak = b.copy()
    weak[:, 1] = 0.05
    bad = check_degenerate_operator_hypotheses(a, weak, x_n)
    assert not bad.checks["boundary_drift"].passed
    assert not bad.checks["drift_ratio"].passed
    assert not bad.passed
    interior = check_degenerate_operator_hypotheses(a, b, x_n + 0.1)
    assert interior.checks["boundary_drift"].passed is None


# ---------------------------------------------------------------------------
# intermediate estimate


def test_intermediate_vanishes_on_polynomial_band(params21):
    # in the radial variable the profile is a quadratic, whose third derivative is zero
    rho = np.linspace(0, 2, 401)
    state = RadialProfile(2.0, 0.5 * np.maximum(rho - 1, 0) ** 2)
    val = intermediate_estimate_sup([state], params21, pairs=5000)
    assert val < 1e-6


def test_intermediate_is_positive_on_cubic(params21):
    rho = np.linspace(0, 2, 401)
    state = RadialProfile(2.0, np.maximum(rho - 1, 0) ** 2 + np.maximum(rho - 1, 0) ** 4)
    assert intermediate_estimate_sup([state], params21, pairs=5000) > 0.01


def test_intermediate_band_errors(params21):
    rho = np.linspace(0, 2, 401)
    state = RadialProfile(2.0, 0.5 * np.maximum(rho - 1, 0) ** 2)
    with pytest.raises(BandError):
        intermediate_estimate_sup([state], params21, band=(10.0, 11.0), pairs=100)
    with pytest.raises(BandError):
        intermediate_estimate_sup([state], params21, time_window=(1.0, 2.0), pairs=100)


# ---------------------------------------------------------------------------
# report


def test_report_json_is_plain_and_deterministic(tmp_path):
    rep = VerificationReport({"n": 2, "p": 1.0}, seed=4)
    cond = rep.add(ConditionReport("c", {"a": Check.within(np.float64(1.5), 1.0, 2.0)}))
    cond.measured["arr"] = np.arange(3)
    cond.measured["flag"] = np.bool_(True)
    cond.measured["big"] = math.inf
    rep.add(ConditionReport("d", {"b": Check.within(float("nan"), 0.0, None)}))
    data = json.loads(rep.to_json())
    assert data["conditions"][0]["measured"] == {"arr": [0, 1, 2], "big": "inf", "flag": True}
    assert data["passed"] is False
    assert data["conditions"][1]["checks"]["b"]["passed"] is False
    p1 = write_report(rep, tmp_path / "a.json").read_bytes()
    p2 = write_report(rep, tmp_path / "b.json").read_bytes()
    assert p1 == p2


def test_condition_without_verdict_does_not_pass():
    assert not ConditionReport("empty").passed
    assert not ConditionReport("x", {"a": Check(None, passed=None)}).passed
    assert ConditionReport("x", {"a": Check.within(1.0, 0.0), "b": Check(None, passed=None)}).passed


# ---------------------------------------------------------------------------
# suite


def test_interface_kinematics_synthetic():
    its = [InterfaceState(t, math.pi * (1 - 0.5 * t) ** 2, inner_radius=1 - 0.5 * t) for t in np.linspace(0, 1, 6)]
    rep = interface_kinematics(its)
    assert rep.passed
    assert rep.measured["recession_speed"] == pytest.approx(0.5)
    its[3] = InterfaceState(its[3].time, 10.0, inner_radius=its[3].inner_radius)
    assert not interface_kinematics(its).passed


def test_exponent_recovery_on_model_profile(params21):
    state = scenario_build(ScenarioSpec(kind="radial_flat_disk", n=2, p=1.0, cells=512))
    rep, fit = exponent_recovery(state, params21)
    assert rep.passed
    assert fit.exponent == pytest.approx(2.0, abs=1e-6)


def test_sphere_oracle_on_exact_states(params21):
    rho = np.linspace(0, 0.5, 51)
    states = []
    for t in (0.0, 0.05, 0.1):
        states.append(RadialProfile(0.5, sphere_cap_height(params21, 1.0, t, rho), time=t))
    rep = sphere_oracle(states, params21, 1.0)
    assert rep.passed
    assert rep.checks["apex_rel_error"].value < 1e-12


def test_verify_trajectory_on_flat_disk(params21):
    traj, params = flat_disk_run(256, tuple(np.linspace(0, 0.05, 11)) + (0.049,))
    report = verify_trajectory(traj.states, params, traj.interfaces, pairs=5000, seed=1)
    names = [c.name for c in report.conditions]
    assert names == ["interface_kinematics", "exponent_recovery", "transversality", "holder", "hodograph",
                     "dual_asymptotics", "intermediate_estimate"]
    assert report.passed, [c.to_dict() for c in report.conditions if not c.passed]


def test_verify_trajectory_isolates_faults(params21):
    traj, params = flat_disk_run(64, (0.0, 0.05))
    report = verify_trajectory(traj.states, params, analyses=("exponent", "interface"))
    verdicts = {c.name: c.passed for c in report.conditions}
    # too few samples inside the fit window at this resolution
    assert verdicts == {"interface_kinematics": True, "exponent_recovery": False}
    assert "fault" in report.conditions[1].checks


def test_initial_pressure_gradient_of_model_profile(params21):
    # g = sqrt(2 v) = sqrt(2) (rho - 1) outside the unit disk
    state = scenario_build(ScenarioSpec(kind="radial_flat_disk", n=2, p=1.0, cells=256))
    rep = check_initial_conditions(state, params21, pairs=2000)
    assert rep.checks["I2_grad_min"].value == pytest.approx(math.sqrt(2), rel=1e-3)
    assert rep.checks["I2_grad_max"].value == pytest.approx(math.sqrt(2), rel=1e-3)
    assert rep.checks["I4_tangential"].value == 0.0
    single = check_transversality([state], params21)
    assert 1.4 <= single.checks["grad_min"].value <= single.checks["grad_max"].value <= 1.5


def test_transversality_flags_a_frozen_field(params21):
    state = scenario_build(ScenarioSpec(kind="radial_flat_disk", n=2, p=1.0, cells=256))
    later = state.with_values(state.values, 0.01)
    rep = check_transversality([state, later], params21)
    assert rep.checks["g_t_max"].value == 0.0
    assert not rep.passed


@given(low=st.floats(1e-6, 1.0), high=st.floats(1.0, 1e6))
def test_identity_field_always_pinched(low, high):
    assert check_matrix_pinch(np.broadcast_to(np.eye(3), (5, 3, 3)), low, high).passed
